"""Command-line front end.

Every command is deterministic given ``--seed`` and writes the seed into its
output: a ``# {...}`` comment line for CSV and text, a ``seed`` field for JSON.
Exit codes are 0 on success or PASS, 1 on FAIL and 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import capacity as cap
from .channel import estimate_mutual_information, transmit
from .errors import ConfigError, DistributionKindError, DomainError, UnsupportedModeError
from .fuzzy_extractor import enroll, make_device, try_reproduce
from .polar import plan_binned_codes, run_binned_transmission
from .state_models import (ContinuousDistribution, MaesHybrid, PiecewiseConstant,
                           StateDistribution, from_config)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TABLE1 = {"none": 0.6961, "enc-causal": 0.7649, "dec": 0.8751, "both": 0.8751}
TABLE1_DELTAS = {"both-none": 0.179, "enc-causal-none": 0.0688}
CELL_TOL = 0.002
DELTA_TOL = 0.005
REGIMES = ("none", "enc-causal", "enc-noncausal", "dec", "both", "all")
PDF_FLOOR = 1e-300
PDF_CEIL_GAP = 1e-12


@dataclass(frozen=True)
class RunConfig:
    command: str
    dist_config: Optional[str]
    seed: int
    output: Optional[str]
    format: str

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(args.command, args.dist, args.seed, args.out, args.format)

    def header(self, **extra) -> str:
        return "# " + json.dumps({"command": self.command, "seed": self.seed, **extra})


class _Usage(Exception):
    pass


def _load_dist(spec: Optional[str]) -> StateDistribution:
    return MaesHybrid() if spec is None else from_config(spec)


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _floats(text: str, kind=float) -> list:
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise _Usage(f"bad list {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# capacity


def cmd_capacity(dist: StateDistribution, regime: str, eps: float) -> dict:
    """Capacity results keyed by regime; ``all`` gives the four table columns."""
    if regime == "all":
        return {k: r.to_dict() for k, r in cap.capacity_table(dist, eps).items()}
    return {regime: cap.capacity(dist, regime, eps).to_dict()}


def _run_capacity(cfg: RunConfig, args) -> int:
    dist = _load_dist(args.dist)
    res = cmd_capacity(dist, args.regime, args.eps)
    if cfg.format == "json":
        _emit(json.dumps({"seed": cfg.seed, "dist": dist.to_config(), "results": res}) + "\n", cfg.output)
        return EXIT_OK
    rows = [(k, f"{r['value']:.6f}", f"{r['lower']:.6f}", f"{r['upper']:.6f}", r["method"])
            for k, r in res.items()]
    _emit(cfg.header(dist=dist.to_config()) + "\n"
          + _csv(rows, ["regime", "value", "lower", "upper", "method"]), cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# table 1


def cmd_table1(lambda1: float = 0.1213, lambda2: float = 0.021, eps: float = 1e-3) -> tuple[list, bool]:
    """Rows ``(name, computed, reference, tolerance, ok)`` and the overall verdict."""
    table = cap.capacity_table(MaesHybrid(lambda1, lambda2), eps)
    v = {k: r.value for k, r in table.items()}
    rows = [(k, v[k], ref, CELL_TOL, abs(v[k] - ref) <= CELL_TOL) for k, ref in TABLE1.items()]
    deltas = {"both-none": v["both"] - v["none"], "enc-causal-none": v["enc-causal"] - v["none"]}
    rows += [(k, deltas[k], ref, DELTA_TOL, abs(deltas[k] - ref) <= DELTA_TOL)
             for k, ref in TABLE1_DELTAS.items()]
    return rows, all(r[-1] for r in rows)


def _run_table1(cfg: RunConfig, args) -> int:
    rows, ok = cmd_table1(args.lambda1, args.lambda2, args.eps)
    if cfg.format == "json":
        body = {"seed": cfg.seed, "lambda1": args.lambda1, "lambda2": args.lambda2,
                "cells": [{"name": n, "computed": c, "reference": r, "tolerance": t,
                           "verdict": "PASS" if k else "FAIL"} for n, c, r, t, k in rows],
                "verdict": "PASS" if ok else "FAIL"}
        _emit(json.dumps(body) + "\n", cfg.output)
    else:
        lines = [cfg.header(lambda1=args.lambda1, lambda2=args.lambda2, eps=args.eps)]
        lines += [f"{n:<16} {c:.6f}  ref {r:.4f} +/- {t:.3f}  {'PASS' if k else 'FAIL'}"
                  for n, c, r, t, k in rows]
        lines.append("PASS" if ok else "FAIL")
        _emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(dist: StateDistribution, mode: str, n: int, seed: int) -> dict:
    """MI estimate against the analytic capacity for one regime."""
    mi, se = estimate_mutual_information(dist, mode, n, seed)
    ref = cap.capacity(dist, mode).value
    tol = max(0.01, 3.0 * se)
    return {"mode": cap.CsiMode.parse(mode).value, "n": n, "seed": seed, "estimate": mi,
            "standard_error": se, "capacity": ref, "tolerance": tol,
            "verdict": "PASS" if abs(mi - ref) <= tol else "FAIL"}


def _run_simulate(cfg: RunConfig, args) -> int:
    dist = _load_dist(args.dist)
    summary = cmd_simulate(dist, args.mode, args.n, cfg.seed)
    if args.trace:
        bits = np.random.default_rng(cfg.seed).integers(0, 2, args.trace, dtype=np.uint8)
        trace = transmit(dist, bits, args.mode, cfg.seed)
        with open(args.trace_out, "w", newline="") if args.trace_out else _nullctx() as fh:
            (fh or sys.stdout).write(trace.to_csv())
    if cfg.format == "json":
        _emit(json.dumps(summary) + "\n", cfg.output)
    else:
        _emit(cfg.header(mode=summary["mode"]) + "\n"
              + _csv([[summary[k] for k in ("estimate", "standard_error", "capacity", "tolerance", "verdict")]],
                     ["estimate", "standard_error", "capacity", "tolerance", "verdict"]), cfg.output)
    return EXIT_OK if summary["verdict"] == "PASS" else EXIT_FAIL


class _nullctx:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


# ---------------------------------------------------------------------------
# FEC sweep


def cmd_fec_sweep(dist: StateDistribution, margins: Sequence[float], n_bins: Sequence[int],
                  blocks: int, seed: int, block_budget: int = 8192) -> list[dict]:
    """One row per (margin, n_bins): realized rate and block error rate."""
    rows = []
    for margin in margins:
        for nb in n_bins:
            plan = plan_binned_codes(dist, block_budget, nb, rate_margin=margin)
            rep = run_binned_transmission(plan, dist, blocks, seed)
            rows.append({"margin": margin, "n_bins": nb, "realized_rate": rep.aggregate_rate,
                         "bler": rep.block_error_rate, "n_blocks": blocks, "seed": seed})
    return rows


def _run_fec_sweep(cfg: RunConfig, args) -> int:
    dist = _load_dist(args.dist)
    rows = cmd_fec_sweep(dist, _floats(args.margins), _floats(args.n_bins, int), args.blocks,
                         cfg.seed, args.budget)
    if cfg.format == "json":
        _emit(json.dumps({"seed": cfg.seed, "rows": rows}) + "\n", cfg.output)
    else:
        keys = ["margin", "n_bins", "realized_rate", "bler", "n_blocks", "seed"]
        _emit(cfg.header(budget=args.budget) + "\n" + _csv([[r[k] for k in keys] for r in rows], keys),
              cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# PUF demo


def cmd_puf_demo(dist: StateDistribution, n_cells: int, key_bits: int, trials: int, seed: int) -> dict:
    """Paired reproduction with and without reliability tags over fresh devices."""
    ok_t = ok_u = only_t = only_u = 0
    for i in range(trials):
        device = make_device(dist, n_cells, (seed, i, 0))
        key, helper = enroll(device, key_bits, (seed, i, 1))
        read_seed = (seed, i, 2)
        t = try_reproduce(device, helper, read_seed) == key
        u = try_reproduce(device, helper, read_seed, use_tags=False) == key
        ok_t, ok_u = ok_t + t, ok_u + u
        only_t, only_u = only_t + (t and not u), only_u + (u and not t)
    discordant = only_t + only_u
    # one-sided sign test: tags fail no more often than the scalar profile
    p_value = stats.binomtest(only_t, discordant, 0.5, "greater").pvalue if discordant else 1.0
    return {"seed": seed, "n_cells": n_cells, "key_bits": key_bits, "trials": trials,
            "success_tagged": ok_t / trials, "success_untagged": ok_u / trials,
            "only_tagged_ok": only_t, "only_untagged_ok": only_u, "sign_test_p": p_value}


def _run_puf_demo(cfg: RunConfig, args) -> int:
    dist = _load_dist(args.dist)
    res = cmd_puf_demo(dist, args.n_cells, args.key_bits, args.trials, cfg.seed)
    _emit(json.dumps(res) + "\n", cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# pdf tabulation


def pdf_grid(dist: ContinuousDistribution, points: int) -> np.ndarray:
    """Evaluation grid with geometric spacing towards both endpoints.

    Three quarters of the points go to the log-spaced ends so a trapezoid over the table
    resolves integrable spikes at 0 or 1. Piecewise densities get a plain grid
    over their support plus both sides of each break.
    """
    if points < 16:
        raise DomainError("points must be >= 16")
    if isinstance(dist, PiecewiseConstant):
        b = np.asarray(dist.breakpoints)
        grid = np.linspace(b[0], b[-1], points)
        inner = b[1:-1]
        grid = np.concatenate([grid, inner, np.nextafter(inner, -np.inf)])
        return np.unique(np.clip(grid, 0.0, 1.0))
    c_lo, c_hi = dist.coord_span()
    lo = max(PDF_FLOOR, float(dist.from_coord(c_lo)))
    gap = max(PDF_CEIL_GAP, float(dist.from_coord_complement(c_hi)))
    n_tail = 3 * points // 8
    low = np.geomspace(lo, 0.01, n_tail)
    high = 1.0 - np.geomspace(0.01, gap, n_tail)
    mid = np.linspace(0.01, 0.99, points - 2 * n_tail)
    return np.unique(np.concatenate([low, mid, high]))


def cmd_plot_pdf(dist: StateDistribution, points: int) -> tuple[np.ndarray, np.ndarray]:
    if dist.atomic:
        raise DistributionKindError("an atomic distribution has no density to tabulate")
    p = pdf_grid(dist, points)
    return p, np.asarray(dist.pdf(p), dtype=float)


def _run_plot_pdf(cfg: RunConfig, args) -> int:
    dist = _load_dist(args.dist)
    p, f = cmd_plot_pdf(dist, args.points)
    if cfg.format == "json":
        _emit(json.dumps({"seed": cfg.seed, "p": p.tolist(), "f_P": f.tolist()}) + "\n", cfg.output)
    else:
        _emit(cfg.header(dist=dist.to_config()) + "\n"
              + _csv(([repr(float(a)), repr(float(b))] for a, b in zip(p, f)), ["p", "f_P"]), cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", help="distribution config: JSON file path or inline JSON (default: Maes model)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="vbsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="capacity for one or all CSI regimes")
    p.add_argument("--regime", choices=REGIMES, default="all")
    p.add_argument("--eps", type=float, default=cap.DEFAULT_EPS)
    p.set_defaults(run=_run_capacity)

    p = sub.add_parser("table1", parents=[common], help="check the Maes-model capacity table")
    p.add_argument("--lambda1", type=float, default=0.1213)
    p.add_argument("--lambda2", type=float, default=0.021)
    p.add_argument("--eps", type=float, default=cap.DEFAULT_EPS)
    p.set_defaults(run=_run_table1)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo MI vs analytic capacity")
    p.add_argument("--mode", choices=REGIMES[:-1], default="none")
    p.add_argument("--n", type=int, default=10 ** 6, help="channel uses for the MI estimate")
    p.add_argument("--trace", type=int, default=0, help="also emit a trace CSV of this many uses")
    p.add_argument("--trace-out", help="trace CSV path (default stdout)")
    p.set_defaults(run=_run_simulate)

    p = sub.add_parser("fec-sweep", parents=[common], help="binned polar scheme: rate and BLER")
    p.add_argument("--margins", default="0.05,0.1,0.2")
    p.add_argument("--n-bins", default="4,8,16")
    p.add_argument("--blocks", type=int, default=20)
    p.add_argument("--budget", type=int, default=8192, help="channel uses per block")
    p.set_defaults(run=_run_fec_sweep)

    p = sub.add_parser("puf-demo", parents=[common], help="PUF enrollment and reproduction (JSON)")
    p.add_argument("--n-cells", type=int, default=256)
    p.add_argument("--key-bits", type=int, default=128)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(run=_run_puf_demo)

    p = sub.add_parser("plot-pdf", parents=[common], help="tabulate f_P(p)")
    p.add_argument("--points", type=int, default=32768)
    p.set_defaults(run=_run_plot_pdf)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(RunConfig.from_args(args), args)
    except (_Usage, ConfigError, DomainError, DistributionKindError, UnsupportedModeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
