"""Command line entry point: ``susyjcm --config run.json [--output out.csv] [--mode MODE]``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import DrivenAtomParams, Envelope, OffDiagState, evolve_offdiag as evolve_coherence, null_field
from .config import MODES, ConfigError, RunConfig, parse_config
from .jcm import (
    JcmParams,
    closed_form_zero_detuning,
    evolve_offdiag,
    evolve_uv,
    lambda_exponents,
)
from .numerics import IntegrationError, TimeGrid
from .reservoir import ReservoirSpec, kernel_terms, reservoir_rate
from .susy_fock import build_generators, verify_algebra

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SAFE_TOLERANCE = 1e-12


def fmt(x) -> str:
    """17 significant digits, enough for an exact float round trip."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


class Table:
    """CSV with ``#`` metadata lines followed by one header row."""

    def __init__(self, columns, meta):
        self.columns = list(columns)
        self.meta = list(meta)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match header")
        self.rows.append([fmt(v) for v in values])

    def render(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta:
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()


def read_table(text: str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of :meth:`Table.render`: metadata, header, raw rows."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def _meta(cfg: RunConfig, **extra):
    items = [("tool", f"susyjcm {__version__}"), ("mode", cfg.mode), ("config", cfg.canonical())]
    items.extend(extra.items())
    return items


def _reservoir(cfg: RunConfig) -> ReservoirSpec:
    return ReservoirSpec.from_pairs([(m.omega, m.g) for m in cfg.reservoir.modes], cfg.reservoir.temperature)


def _atom(cfg: RunConfig) -> DrivenAtomParams:
    return DrivenAtomParams(cfg.atom.omega0, cfg.atom.dipole_d)


def _jcm(cfg: RunConfig, m=None, k=None, delta=None) -> JcmParams:
    j = cfg.jcm
    m = j.m if m is None else m
    if k is None and delta is None:
        return JcmParams(j.complex_g(), j.k, m, j.omega0, j.omega)
    # swept k or delta: hold the detuning fixed unless it is swept itself
    k = j.k if k is None else k
    delta = j.k * j.omega - j.omega0 if delta is None else delta
    return JcmParams.with_detuning(j.complex_g(), k, m, delta, j.omega)


def _grids(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """Integration grid and the indices of it that are written out."""
    fine = TimeGrid(cfg.grid.start, cfg.grid.stop, cfg.numeric.step).points()
    stride = cfg.output_stride()
    idx = np.arange(0, fine.size, stride)
    if idx[-1] != fine.size - 1:
        idx = np.append(idx, fine.size - 1)
    return fine, idx


def run_rate(cfg: RunConfig) -> str:
    bath = _reservoir(cfg)
    fine, idx = _grids(cfg)
    table = Table(["t", "reservoir_rate", "kernel_total_re", "kernel_total_im"], _meta(cfg))
    for t in fine[idx]:
        total = kernel_terms(bath, t).total
        table.add(t, reservoir_rate(bath, t), total.real, total.imag)
    return table.render()


def run_null_field(cfg: RunConfig) -> tuple[str, dict]:
    fine, idx = _grids(cfg)
    env, report = null_field(_atom(cfg), _reservoir(cfg), fine[idx], cfg.numeric.sin_threshold)
    summary = report.to_dict()
    table = Table(["t", "envelope_sq", "status"], _meta(cfg, feasibility=json.dumps(summary, sort_keys=True)))
    for t, v, s in zip(env.grid, env.values, env.status):
        table.add(t, v, s.value)
    return table.render(), summary


def run_evolve_coherence(cfg: RunConfig) -> str:
    atom, bath = _atom(cfg), _reservoir(cfg)
    fine, idx = _grids(cfg)
    meta = {}
    if cfg.envelope == "null":
        env, report = null_field(atom, bath, fine, cfg.numeric.sin_threshold)
        meta["feasibility"] = json.dumps(report.to_dict()["counts"], sort_keys=True)
    elif cfg.envelope == "zero":
        env = Envelope.zeros(fine)
    else:
        env = Envelope(np.array(cfg.envelope.grid), np.array(cfg.envelope.values))
    r01, r10 = cfg.initial.offdiag()
    traj = evolve_coherence(atom, env, bath, OffDiagState(r01, r10), fine)
    table = Table(
        ["t", "gamma", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "abs_rho01", "rk4_rho01_re", "rk4_rho01_im"],
        _meta(cfg, **meta),
    )
    for i in idx:
        a, b, c = traj.rho01[i], traj.rho10[i], traj.rk4_rho01[i]
        table.add(traj.grid[i], traj.gamma[i], a.real, a.imag, b.real, b.imag, abs(a), c.real, c.imag)
    return table.render()


def run_susy_check(cfg: RunConfig) -> tuple[str, bool]:
    report = verify_algebra(build_generators(cfg.numeric.fock_dim, cfg.jcm.k))
    doc = report.to_dict()
    doc["tool"] = f"susyjcm {__version__}"
    doc["safe_tolerance"] = SAFE_TOLERANCE
    ok = report.max_safe_relative() < SAFE_TOLERANCE
    doc["passed"] = ok
    return json.dumps(doc, indent=2, sort_keys=True) + "\n", ok


def run_evolve_polarization(cfg: RunConfig) -> str:
    p = _jcm(cfg)
    fine, idx = _grids(cfg)
    r01, r10 = cfg.initial.offdiag()
    mode, model = cfg.jcm.c1_mode, cfg.jcm.model
    off = evolve_offdiag(p, r01, r10, fine, c1_mode=mode, model=model)
    if model == "standard":
        s0 = (r01 + r10), 1j * (r01 - r10)
        uv = evolve_uv(p, s0[0].real, s0[1].real, fine, c1_mode=mode)
        u, v = uv.u, uv.v
    else:
        u, v = off.u.real, off.v.real
    closed = p.delta == 0 and model == "standard" and mode == "full"
    cols = ["t", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "u", "v"]
    if closed:
        cols += ["u_closed", "v_closed"]
        lam = lambda_exponents(p)
        meta = {"lambda_u": fmt(lam.lambda_u), "lambda_v": fmt(lam.lambda_v)}
    else:
        meta = {}
    table = Table(cols, _meta(cfg, delta=fmt(p.delta), **meta))
    u0, v0 = u[0], v[0]
    for i in idx:
        t = fine[i]
        row = [t, off.rho01[i].real, off.rho01[i].imag, off.rho10[i].real, off.rho10[i].imag, u[i], v[i]]
        if closed:
            c = closed_form_zero_detuning(p, u0, v0, t)
            row += [c.u, c.v]
        table.add(*row)
    return table.render()


def _sweep_point(args):
    cfg, m, k, delta, fine = args
    p = _jcm(cfg, m=m, k=k, delta=delta)
    lam = lambda_exponents(p)
    r01, r10 = cfg.initial.offdiag()
    u0, v0 = (r01 + r10).real, (1j * (r01 - r10)).real
    try:
        uv = evolve_uv(p, u0, v0, fine, c1_mode=cfg.jcm.c1_mode)
    except IntegrationError as exc:
        return p, lam, float("nan"), float("nan"), f"aborted at t={fmt(exc.t)}"
    return p, lam, uv.u[-1], uv.v[-1], "ok"


def run_sweep(cfg: RunConfig) -> str:
    j, sw = cfg.jcm, cfg.sweep
    base_delta = j.k * j.omega - j.omega0
    ms = sw.m or [j.m]
    ks = sw.k or [j.k]
    deltas = sw.delta or [base_delta]
    fine, _ = _grids(cfg)
    points = [(cfg, m, k, d, fine) for m, k, d in itertools.product(ms, ks, deltas)]
    # map() yields in submission order, so output order never depends on scheduling
    with ThreadPoolExecutor(max_workers=cfg.numeric.workers) as pool:
        results = list(pool.map(_sweep_point, points))
    table = Table(
        ["m", "k", "delta", "lambda_u", "lambda_v", "u_final", "v_final", "status"],
        _meta(cfg, t_final=fmt(fine[-1])),
    )
    for p, lam, uf, vf, status in results:
        table.add(str(p.m), str(p.k), p.delta, lam.lambda_u, lam.lambda_v, uf, vf, status)
    return table.render()


def run(cfg: RunConfig, output: str | None = None, stdout=None, stderr=None) -> int:
    """Dispatch on ``cfg.mode`` and write results; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    sidecar = None
    try:
        if cfg.mode == "rate":
            text = run_rate(cfg)
        elif cfg.mode == "null-field":
            text, summary = run_null_field(cfg)
            sidecar = json.dumps(summary, indent=2, sort_keys=True) + "\n"
        elif cfg.mode == "evolve-coherence":
            text = run_evolve_coherence(cfg)
        elif cfg.mode == "susy-check":
            text, _ = run_susy_check(cfg)
        elif cfg.mode == "evolve-polarization":
            text = run_evolve_polarization(cfg)
        else:
            text = run_sweep(cfg)
    except (ValueError, ArithmeticError) as exc:
        stderr.write(f"numerical abort: {exc}\n")
        return EXIT_NUMERIC

    if output is None:
        stdout.write(text)
    else:
        out = Path(output)
        out.write_text(text, encoding="utf-8")
        if sidecar is not None:
            out.with_name(out.name + ".feasibility.json").write_text(sidecar, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="susyjcm", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="strict JSON run configuration")
    ap.add_argument("--output", help="output file (default: stdout)")
    ap.add_argument("--mode", choices=MODES, help="override the config's mode")
    ap.add_argument("--version", action="version", version=f"susyjcm {__version__}")
    return ap


def main(argv=None, stdout=None, stderr=None) -> int:
    args = build_parser().parse_args(argv)
    stderr = stderr or sys.stderr
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, mode=args.mode)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    return run(cfg, args.output, stdout=stdout, stderr=stderr)


if __name__ == "__main__":
    sys.exit(main())
