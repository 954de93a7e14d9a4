import io
import json
import math

import pytest

from susyjcm.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main, read_table, run
from susyjcm.config import ConfigError, parse_config

POLARIZATION = {
    "mode": "evolve-polarization",
    "jcm": {"g": 1, "k": 2, "m": 3, "delta": 0},
    "grid": {"stop": 0.5, "step": 0.05},
    "initial": {"u0": 1, "v0": 1},
}
NULL_FIELD = {
    "mode": "null-field",
    "reservoir": {"modes": [{"omega": 1.0, "g": 1.0}], "temperature": 0.0},
    "atom": {"omega0": 1.0, "dipole_d": 2.0},
    "grid": {"stop": 10.0, "step": 0.01},
    "numeric": {"step": 0.01},
}


def _run(tmp_path, doc, *extra):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    out, err = io.StringIO(), io.StringIO()
    code = main(["--config", str(path), *extra], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestParseConfig:
    def test_defaults_filled(self):
        cfg = parse_config(json.dumps(POLARIZATION))
        assert cfg.numeric.step == 1e-4
        assert cfg.numeric.sin_threshold == 1e-6
        assert cfg.numeric.fock_dim == 32
        assert cfg.jcm.omega0 == 2.0 and cfg.jcm.omega == 1.0
        assert '"fock_dim":32' in cfg.canonical()

    def test_zero_step(self):
        doc = dict(POLARIZATION, grid={"stop": 1.0, "step": 0})
        with pytest.raises(ConfigError, match="grid.step must be > 0"):
            parse_config(json.dumps(doc))

    def test_unknown_key(self):
        doc = dict(POLARIZATION, reservoir={"modes": [{"omega": 1, "g": 1}], "tempreture": 1})
        with pytest.raises(ConfigError, match="tempreture"):
            parse_config(json.dumps(doc))

    def test_json_error_has_position(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config('{"mode":\n oops}')

    def test_missing_block(self):
        with pytest.raises(ConfigError, match="'initial'"):
            parse_config(json.dumps({k: v for k, v in POLARIZATION.items() if k != "initial"}))

    def test_inconsistent_detuning(self):
        doc = dict(POLARIZATION, jcm={"g": 1, "k": 2, "m": 3, "delta": 0.5, "omega0": 2.0, "omega": 1.0})
        with pytest.raises(ConfigError, match="delta must equal"):
            parse_config(json.dumps(doc))

    def test_mode_override(self):
        assert parse_config(json.dumps(POLARIZATION), mode="susy-check").mode == "susy-check"

    def test_stride_must_divide(self):
        doc = dict(POLARIZATION, grid={"stop": 1.0, "step": 0.00015})
        with pytest.raises(ConfigError, match="multiple"):
            parse_config(json.dumps(doc))

    def test_nan_rejected(self):
        with pytest.raises(ConfigError, match="finite"):
            parse_config('{"mode": "rate", "reservoir": {"modes": [{"omega": NaN, "g": 1}]}, "grid": {"stop": 1}}')

    def test_complex_coupling(self):
        doc = dict(POLARIZATION, jcm={"g": [0.3, 0.4], "k": 1, "m": 0, "delta": 0})
        assert parse_config(json.dumps(doc)).jcm.complex_g() == 0.3 + 0.4j


class TestRun:
    def test_polarization_csv(self, tmp_path):
        code, out, _ = _run(tmp_path, POLARIZATION)
        assert code == EXIT_OK
        meta, header, rows = read_table(out)
        assert meta["mode"] == "evolve-polarization"
        assert meta["lambda_u"] == "14"
        assert header == ["t", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "u", "v", "u_closed", "v_closed"]
        assert len(rows) == 11
        for row in rows:
            t, u, v, uc, vc = (float(row[i]) for i in (0, 5, 6, 7, 8))
            assert u == pytest.approx(math.exp(7 * t * t), rel=1e-8)
            assert v == pytest.approx(math.exp(-33 * t * t), rel=1e-8)
            assert uc == pytest.approx(u, rel=1e-8) and vc == pytest.approx(v, rel=1e-8)

    def test_csv_round_trip(self, tmp_path):
        from susyjcm.jcm import JcmParams, evolve_uv
        from susyjcm.numerics import TimeGrid

        _, out, _ = _run(tmp_path, POLARIZATION)
        _, _, rows = read_table(out)
        fine = TimeGrid(0, 0.5, 1e-4).points()
        uv = evolve_uv(JcmParams.with_detuning(1, 2, 3, 0), 1.0, 1.0, fine)
        for j, row in enumerate(rows):
            i = min(j * 500, fine.size - 1)
            assert float(row[0]) == fine[i]
            assert float(row[5]) == uv.u[i]
            assert float(row[6]) == uv.v[i]

    def test_byte_identical(self, tmp_path):
        assert _run(tmp_path, POLARIZATION)[1] == _run(tmp_path, POLARIZATION)[1]

    def test_overflow_exit(self, tmp_path):
        doc = dict(POLARIZATION, grid={"stop": 3.0})
        code, out, err = _run(tmp_path, doc)
        assert code == EXIT_NUMERIC
        assert "t=" in err and out == ""

    def test_config_error_exit(self, tmp_path):
        code, _, err = _run(tmp_path, dict(POLARIZATION, grid={"stop": 1.0, "step": 0}))
        assert code == EXIT_CONFIG
        assert "grid.step must be > 0" in err

    def test_missing_file(self, tmp_path):
        err = io.StringIO()
        assert main(["--config", str(tmp_path / "nope.json")], stderr=err) == EXIT_CONFIG

    def test_susy_check(self, tmp_path):
        doc = {"mode": "susy-check", "jcm": {"k": 2}, "numeric": {"fock_dim": 16}}
        code, out, _ = _run(tmp_path, doc)
        assert code == EXIT_OK
        report = json.loads(out)
        assert len(report["relations"]) == 11
        assert report["passed"] is True
        for entry in report["relations"].values():
            assert entry["safe_residual"] < 1e-12 * entry["scale"]
        assert report["relations"]["{Q^dag, Q} = N'"]["full_residual"] > 0

    def test_null_field_infeasible(self, tmp_path):
        out_path = tmp_path / "nf.csv"
        code, _, _ = _run(tmp_path, NULL_FIELD, "--output", str(out_path))
        assert code == EXIT_OK
        meta, header, rows = read_table(out_path.read_text())
        assert header == ["t", "envelope_sq", "status"]
        statuses = {r[2] for r in rows}
        assert "FEASIBLE" not in statuses
        for t, v, s in rows:
            if s == "INFEASIBLE_NEGATIVE":
                assert float(v) == pytest.approx(-2.0, rel=1e-9)
        report = json.loads((tmp_path / "nf.csv.feasibility.json").read_text())
        assert report["counts"]["FEASIBLE"] == 0
        assert report["counts"]["INFEASIBLE_NEGATIVE"] > 0

    def test_rate(self, tmp_path):
        doc = dict(NULL_FIELD, mode="rate")
        code, out, _ = _run(tmp_path, doc)
        assert code == EXIT_OK
        _, header, rows = read_table(out)
        for row in rows:
            t, rate, re, im = map(float, row)
            assert rate == pytest.approx(2 * math.sin(t), abs=1e-13)
            assert re == pytest.approx(rate, abs=1e-12) and abs(im) < 1e-12

    def test_evolve_coherence_frozen(self, tmp_path):
        doc = {
            "mode": "evolve-coherence",
            "reservoir": {"modes": [{"omega": 2.0, "g": 1.0}, {"omega": 3.0, "g": 0.5}]},
            "atom": {"omega0": 1.0, "dipole_d": 2.0},
            "grid": {"start": 1.8, "stop": 2.8, "step": 0.01},
            "numeric": {"step": 0.001},
            "initial": {"rho01": [0.3, 0.1]},
        }
        code, out, _ = _run(tmp_path, doc)
        assert code == EXIT_OK
        meta, header, rows = read_table(out)
        assert json.loads(meta["feasibility"])["FEASIBLE"] == 1001
        for row in rows:
            assert float(row[header.index("abs_rho01")]) == pytest.approx(abs(0.3 + 0.1j), rel=1e-12)

    def test_evolve_coherence_singular_aborts(self, tmp_path):
        doc = {
            "mode": "evolve-coherence",
            "reservoir": {"modes": [{"omega": 2.5, "g": 1.0}]},
            "atom": {"omega0": 1.0, "dipole_d": 2.0},
            "grid": {"start": 1.0, "stop": 4.0},
            "numeric": {"step": 0.001, "sin_threshold": 1e-3},
            "initial": {"rho01": [0.3, 0.1]},
        }
        code, _, err = _run(tmp_path, doc)
        assert code == EXIT_NUMERIC and "undefined" in err

    def test_sweep_order_and_parallel(self, tmp_path):
        doc = {
            "mode": "sweep",
            "jcm": {"g": 1, "k": 1, "m": 0, "delta": 0},
            "grid": {"stop": 0.3},
            "numeric": {"step": 0.001, "workers": 4},
            "initial": {"u0": 1, "v0": 1},
            "sweep": {"m": [3, 0], "k": [2, 0], "delta": [0.0, 1.0]},
        }
        code, out, _ = _run(tmp_path, doc)
        assert code == EXIT_OK
        _, header, rows = read_table(out)
        assert [(r[0], r[1], float(r[2])) for r in rows] == [
            (m, k, d) for m in ("3", "0") for k in ("2", "0") for d in (0.0, 1.0)
        ]
        first = dict(zip(header, rows[0]))
        assert float(first["lambda_u"]) == 14 and float(first["u_final"]) == pytest.approx(math.exp(7 * 0.09), rel=1e-8)
        serial = dict(doc, numeric={"step": 0.001, "workers": 1})
        assert _run(tmp_path, serial)[1].split("\n", 3)[3] == out.split("\n", 3)[3]

    def test_run_returns_status_directly(self):
        cfg = parse_config(json.dumps(POLARIZATION))
        buf = io.StringIO()
        assert run(cfg, stdout=buf) == EXIT_OK
        assert buf.getvalue().startswith("# tool: susyjcm")
