"""Command line entry point: ``lloydflock run | batch | check``.

Exit codes: 0 ok, 1 violations (or SR < 1 for batch), 2 input error, 3 runtime error.
Set ``RBL_LOG`` to a logging level name (DEBUG, INFO, ...) for more output.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .simulator import check_proximity, check_safety, metrics, run
from .svg import trajectory_svg

EXIT_OK, EXIT_VIOLATIONS, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("lloydflock")


class InputError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("RBL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _load(path):
    try:
        return io.load_scenario(path)
    except OSError as exc:
        raise InputError(f"cannot read scenario {path}: {exc.strerror}") from None
    except io.ScenarioFileError as exc:
        raise InputError(f"{path}: {exc}") from None


def parse_seeds(text: str) -> list[int]:
    """``"A..B"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return list(range(int(a), int(b) + 1))
        return [int(text)]
    except ValueError:
        raise InputError(f"bad seed range {text!r}, expected A..B") from None


def _run_one(scenario, seed, out: Path) -> dict:
    trace = run(scenario, seed)
    out.mkdir(parents=True, exist_ok=True)
    io.write_trace_csv(trace, out / "trace.csv")
    m = metrics([trace])
    m.update(success=trace.success, seed=trace.seed, goal_times=trace.goal_times,
             completion_time=trace.completion_time, violations=len(trace.violations),
             events=len(trace.events))
    io.write_json(m, out / "metrics.json")
    io.write_json(io.violations_to_list(trace.violations), out / "violations.json")
    (out / "traj.svg").write_text(trajectory_svg(trace, scenario))
    log.info("seed %d: success=%s time=%s violations=%d", trace.seed, trace.success,
             trace.completion_time, len(trace.violations))
    return {"seed": trace.seed, "success": trace.success, "time": trace.completion_time,
            "violations": len(trace.violations)}


def _batch_worker(args):
    path, seed, out = args
    return _run_one(io.load_scenario(path), seed, Path(out))


def cmd_run(args) -> int:
    sc = _load(args.scenario)
    res = _run_one(sc, args.seed, Path(args.out))
    print(f"seed {res['seed']}: success={res['success']} time={res['time']} "
          f"violations={res['violations']}")
    return EXIT_VIOLATIONS if res["violations"] else EXIT_OK


def cmd_batch(args) -> int:
    sc = _load(args.scenario)
    seeds = parse_seeds(args.seeds)
    if not seeds:
        raise InputError(f"seed range {args.seeds!r} is empty")
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    out = Path(args.out)
    jobs = [(args.scenario, s, str(out / f"seed_{s}")) for s in seeds]
    if args.jobs == 1:
        results = [_batch_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_worker, jobs))
    ok = [r for r in results if r["success"]]
    sr = len(ok) / len(results)
    summary = {
        "scenario": sc.name or Path(args.scenario).stem,
        "N": sc.n,
        "runs": len(results),
        "SR": sr,
        "avg_time": sum(r["time"] for r in ok) / len(ok) if ok else None,
        "per_seed": results,
    }
    io.write_json(summary, out / "summary.json")
    avg = "-" if summary["avg_time"] is None else f"{summary['avg_time']:.2f}"
    print(f"{'scenario':<24} {'N':>3} {'avg. time (s)':>14} {'SR':>5}")
    print(f"{summary['scenario']:<24} {sc.n:>3} {avg:>14} {sr:>5.2f}")
    return EXIT_OK if sr == 1.0 else EXIT_VIOLATIONS


def cmd_check(args) -> int:
    sc = _load(args.scenario)
    try:
        trace = io.read_trace_csv(args.trace, sc.n)
    except OSError as exc:
        raise InputError(f"cannot read trace {args.trace}: {exc.strerror}") from None
    except io.TraceFileError as exc:
        raise InputError(f"{args.trace}: {exc}") from None
    vs = check_safety(trace, sc) + check_proximity(trace, sc)
    if not vs:
        print("no violations")
        return EXIT_OK
    print(f"{'kind':<10} {'i':>3} {'j':>3} {'t_start':>9} {'t_end':>9} {'distance':>9}")
    for v in vs:
        print(f"{v.kind:<10} {v.i:>3} {v.j:>3} {v.t_start:>9.2f} {v.t_end:>9.2f} "
              f"{v.min_distance:>9.4f}")
    return EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lloydflock", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="simulate one seed")
    r.add_argument("--scenario", required=True)
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)
    b = sub.add_parser("batch", help="simulate a range of seeds")
    b.add_argument("--scenario", required=True)
    b.add_argument("--seeds", required=True, help="inclusive range A..B")
    b.add_argument("--out", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_batch)
    c = sub.add_parser("check", help="re-check a stored trace")
    c.add_argument("--trace", required=True)
    c.add_argument("--scenario", required=True)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # anything else is a runtime failure
        log.debug("runtime error", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
