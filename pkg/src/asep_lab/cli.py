"""Command-line front end: ``asep-lab <experiment> [flags]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

from . import __version__
from .estimators import (estimate_coexistence, estimate_collision, estimate_neighbor_density,
                         estimate_scaled_distance, estimate_separation, estimate_speed_law,
                         pair_batch)
from .harness import EstimateSummary, default_threads
from .hydro import current_derivative_check, empirical_profile
from .multitype import estimate_joint_speeds, estimate_overtake
from .oracles import run_oracles

SUBCOMMANDS = ("collision", "speed", "separation", "distance", "neighbors", "overtake",
               "joint-speeds", "growth", "hydro-profile", "current-check", "oracle")

DEFAULTS = {"p": 1.0, "m": 1, "t": 400.0, "t_max": 500.0, "n": 300, "reps": 1000,
            "seed": 0, "format": "json", "output": None, "early_stop_gap": None,
            "route": "pattern"}
SUB_DEFAULTS = {
    "hydro-profile": {"t": 200.0, "r": [-0.75, -0.25, 0.0, 0.25, 0.75]},
    "current-check": {"t": 200.0, "r": [0.0]},
    "separation": {"r": [0.0, -0.5, 0.5]},
    "joint-speeds": {"r": [0.0]},
}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="right-jump rate, 1/2 < p <= 1")
    common.add_argument("--m", type=int, help="gap between the two second-class particles")
    common.add_argument("--t", type=float, help="observation time")
    common.add_argument("--t-max", dest="t_max", type=float, help="collision horizon")
    common.add_argument("--n", type=int, help="growth grid size")
    common.add_argument("--reps", type=int, help="number of replicas")
    common.add_argument("--seed", type=int, help="master seed (fallback: $ASEP_LAB_SEED)")
    common.add_argument("--threads", type=int, help="worker processes")
    common.add_argument("--r", type=float, nargs="+", help="speed parameter(s)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--early-stop-gap", dest="early_stop_gap", type=int,
                        help="collision only: stop a replica once Y - X reaches this gap")
    common.add_argument("--route", choices=("pattern", "direct"), help="overtake only")
    ap = argparse.ArgumentParser(prog="asep-lab", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def resolve(ns: argparse.Namespace) -> dict:
    """Fill unset flags with defaults and record which ones were defaulted."""
    man = {"subcommand": ns.subcommand}
    defaulted = []
    sub_def = SUB_DEFAULTS.get(ns.subcommand, {})
    keys = list(DEFAULTS) + ["threads", "r"]
    for key in keys:
        v = getattr(ns, key, None)
        if v is None:
            if key == "seed" and os.environ.get("ASEP_LAB_SEED"):
                try:
                    v = int(os.environ["ASEP_LAB_SEED"])
                except ValueError:
                    raise UsageError("ASEP_LAB_SEED must be an integer") from None
                defaulted.append("seed:env")
            else:
                v = sub_def.get(key, DEFAULTS.get(key))
                if key == "threads":
                    v = default_threads()
                if key == "r" and v is None:
                    v = [0.0]
                defaulted.append(key)
        man[key] = v
    man["defaulted"] = defaulted
    if not (0.5 < man["p"] <= 1.0):
        raise UsageError(f"--p must lie in (1/2, 1], got {man['p']}")
    for key in ("reps", "threads", "m", "n"):
        if man[key] < 1:
            raise UsageError(f"--{key} must be positive")
    for key in ("t", "t_max"):
        if not man[key] > 0:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    return man


def _needs_p1(man, what):
    if man["p"] != 1.0:
        raise UsageError(f"{what} is defined for the totally asymmetric case --p 1")


def run(man: dict) -> tuple[list[EstimateSummary], list[dict] | None]:
    """Returns the summaries and, for profile-style runs, table rows."""
    sc = man["subcommand"]
    p, m, t, T, reps, seed, th = (man["p"], man["m"], man["t"], man["t_max"], man["reps"],
                                  man["seed"], man["threads"])
    if sc == "collision":
        return [estimate_collision(p, m, T, reps, seed, threads=th,
                                   early_stop_gap=man["early_stop_gap"])], None
    if sc == "speed":
        return [estimate_speed_law(p, t, reps, seed, threads=th).summary], None
    if sc in ("separation", "distance"):
        batch = pair_batch(p, 1, t, reps, seed, snapshot=t, threads=th)
        if sc == "distance":
            return [estimate_scaled_distance(p, t, reps, seed, batch=batch)], None
        for r in man["r"]:
            if abs(r) > 2 * p - 1:
                raise UsageError("|r| must not exceed p - q")
        return [estimate_separation(p, r, t, reps, seed, batch=batch) for r in man["r"]], None
    if sc == "neighbors":
        return list(estimate_neighbor_density(p, t, reps, seed, threads=th)), None
    if sc == "overtake":
        _needs_p1(man, "overtake")
        return [estimate_overtake(m, T, reps, seed, route=man["route"], threads=th)], None
    if sc == "joint-speeds":
        _needs_p1(man, "joint-speeds")
        for r in man["r"]:
            if abs(r) > 1:
                raise UsageError("|r| must be at most 1")
        return [estimate_joint_speeds(r, t, reps, seed, threads=th) for r in man["r"]], None
    if sc == "growth":
        if man["n"] < 50:
            raise UsageError("--n must be at least 50")
        return [estimate_coexistence(man["n"], reps, seed, threads=th)], None
    if sc == "hydro-profile":
        rows = empirical_profile(p, t, man["r"], reps, seed, threads=th)
        out = [EstimateSummary("hydro-profile", {"p": p, "t": t, "r": row.r, "n_reps": reps,
                                                 "seed": seed},
                               row.empirical, row.stderr, reps, target=row.target,
                               target_kind="limit-as-t-grows") for row in rows]
        table = [{"r": row.r, "empirical": row.empirical, "target": row.target,
                  "stderr": row.stderr} for row in rows]
        return out, table
    if sc == "current-check":
        out = []
        for r in man["r"]:
            if abs(r) >= 2 * p - 1:
                raise UsageError("r must lie strictly inside the fan")
            d = current_derivative_check(p, r, t, reps, seed, threads=th)
            out.append(EstimateSummary("current-check", {"p": p, "r": r, "t": t,
                                                         "n_reps": reps, "seed": seed},
                                       d.lhs, d.stderr, reps, target=d.rhs,
                                       target_kind="limit-as-t-grows",
                                       extras={"gap": d.gap, "delta": d.delta}))
        return out, None
    if sc == "oracle":
        suite = run_oracles()
        passed = sum(a for a, _ in suite.results.values())
        total = sum(b for _, b in suite.results.values())
        s = EstimateSummary("oracle", {}, passed / total, 0.0, total, target=1.0,
                            target_kind="exact",
                            extras={"checks": {k: list(v) for k, v in suite.results.items()},
                                    "failures": suite.failures})
        return [s], None
    raise UsageError(f"unknown subcommand {sc}")


def _result_block(s: EstimateSummary) -> dict:
    d = s.to_dict()
    for k in ("estimate", "stderr", "target", "censoring"):
        if isinstance(d[k], float) and math.isnan(d[k]):
            d[k] = None
    return d


def render(man: dict, summaries: list[EstimateSummary], table, duration: float) -> str:
    if man["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table is not None:
            w.writerow(["r", "empirical", "target", "stderr"])
            for row in table:
                w.writerow([repr(row["r"]), repr(row["empirical"]), repr(row["target"]),
                            repr(row["stderr"])])
        else:
            w.writerow(["experiment", "estimate", "stderr", "ci95_lo", "ci95_hi", "target",
                        "target_kind", "censoring", "n_reps"])
            for s in summaries:
                lo, hi = s.ci95
                w.writerow([s.experiment, repr(s.estimate), repr(s.stderr), repr(lo), repr(hi),
                            "" if s.target is None else repr(s.target), s.target_kind,
                            "" if s.censoring is None else repr(s.censoring), s.n_reps])
        return buf.getvalue()
    doc = {"manifest": man, "result": _result_block(summaries[0])}
    if len(summaries) > 1:
        doc["results"] = [_result_block(s) for s in summaries]
    if table is not None:
        doc["table"] = table
    doc["meta"] = {"version": __version__, "duration_s": duration}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        man = resolve(ns)
        t0 = time.perf_counter()
        fh = None
        if man["output"]:
            try:
                fh = open(man["output"], "w")
            except OSError as e:
                print(f"asep-lab: cannot write {man['output']}: {e}", file=sys.stderr)
                return 1
        summaries, table = run(man)
        text = render(man, summaries, table, time.perf_counter() - t0)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"asep-lab: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - reported as a runtime failure
        print(f"asep-lab: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if fh is not None:
        with fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if man["subcommand"] == "oracle" and summaries[0].estimate != 1.0:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
