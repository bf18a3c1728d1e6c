"""Command-line front end.

Subcommands: ``propagate``, ``evolve``, ``cone``, ``verify``, ``bench``.
Exit codes: 0 success, 1 verification failure, 2 strict no-path,
64 usage or parity error, 65 malformed input file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .amplitude import Chirality
from .combinatorics import DEFAULT_BUDGET, BudgetExceeded
from .lattice import LatticeError, Site, cone_displacements, string_counts
from .propagator import (
    Propagator,
    cone_table,
    convolve,
    propagator_brute_force,
    propagator_closed_form,
    propagator_from_evolution,
    to_float,
)
from .verification import SUITES, faulty_table_factory, run_suite
from .walk import WalkState, evolve

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_NO_PATH = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    chirality: Chirality = Chirality.PLUS
    t: int = 0
    source: Optional[Site] = None
    target: Optional[Site] = None
    fmt: str = "json"
    out: Optional[str] = None
    budget: int = DEFAULT_BUDGET
    jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise UsageError("--t must be non-negative")
        if self.budget < 0:
            raise UsageError("--budget must be non-negative")
        if self.fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _site(text: str) -> Site:
    try:
        return Site.parse(text)
    except (LatticeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _chirality(text: str) -> Chirality:
    try:
        return Chirality.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max string triples for brute force")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--chi", type=_chirality, default=Chirality.PLUS, help="chirality, + or -")

    parser = _Parser(prog="weylwalk", description="Exact propagators of the BCC Weyl quantum walk.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("propagate", parents=[common], help="2x2 propagator between two sites")
    p.add_argument("--from", dest="source", type=_site, required=True)
    p.add_argument("--to", dest="target", type=_site, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--engine", choices=("closed", "brute", "step"), default="closed")
    p.add_argument("--strict", action="store_true", help="exit 2 when no path joins the sites")

    e = sub.add_parser("evolve", parents=[common], help="evolve a state file for t steps")
    e.add_argument("--state", required=True, help="JSON state file")
    e.add_argument("--t", type=int, required=True)
    e.add_argument("--engine", choices=("step", "convolve"), default="step")

    c = sub.add_parser("cone", parents=[common], help="every propagator of the t-step cone")
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--from", dest="source", type=_site, default=Site(0, 0, 0))

    v = sub.add_parser("verify", parents=[common], help="run the property suites")
    v.add_argument("--suite", action="append", choices=sorted(SUITES), help="repeatable; default all")
    v.add_argument("--scale", choices=("quick", "default"), default="default")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    b = sub.add_parser("bench", parents=[common], help="time the engines against t")
    b.add_argument("--t-max", type=int, default=8)
    b.add_argument("--step-max", type=int, default=30, help="largest t for the step engine")
    return parser


# -- output helpers ---------------------------------------------------------


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _propagator_rows(p: Propagator):
    f = to_float(p)
    for r in range(2):
        for c in range(2):
            yield [p.t, p.chirality.symbol, *p.source, *p.target, r, c, repr(float(f[r, c].real)), repr(float(f[r, c].imag))]


_PROP_HEADER = ["t", "chirality", "from1", "from2", "from3", "to1", "to2", "to3", "row", "col", "re", "im"]


# -- commands ---------------------------------------------------------------------


def cmd_propagate(cfg: RunConfig, engine: str = "closed", strict: bool = False) -> int:
    if cfg.source.parity != cfg.target.parity:
        raise UsageError(f"sites {cfg.source} and {cfg.target} lie on different sublattices")
    if engine == "brute":
        p = propagator_brute_force(cfg.source, cfg.target, cfg.t, cfg.chirality, cfg.budget)
    elif engine == "step":
        p = propagator_from_evolution(cfg.source, cfg.target, cfg.t, cfg.chirality)
    else:
        p = propagator_closed_form(cfg.source, cfg.target, cfg.t, cfg.chirality)
    if cfg.fmt == "csv":
        _emit(cfg, _csv_text(_PROP_HEADER, _propagator_rows(p)))
    else:
        _emit(cfg, _dump_json(p.to_json()))
    if strict and string_counts(cfg.source, cfg.target, cfg.t) is None:
        print(f"no {cfg.t}-step path from {cfg.source} to {cfg.target}", file=sys.stderr)
        return EXIT_NO_PATH
    return EXIT_OK


def load_state(path: str) -> WalkState:
    try:
        with open(path) as fh:
            rows = json.load(fh)
        return WalkState.from_json(rows)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"malformed state file {path}: {exc}") from None


def cmd_evolve(cfg: RunConfig, state_path: str, engine: str = "step") -> int:
    state = load_state(state_path)
    if engine == "convolve":
        final = convolve(state, cfg.t, cfg.chirality)
    else:
        final = evolve(state, cfg.t, cfg.chirality)
    # every site reachable in t steps gets a row, even where the amplitude cancels
    if cfg.t == 0:
        support = set(state.sites())
    else:
        disps = cone_displacements(cfg.t)
        support = {site + d for site in state.sites() for d in disps}
    rows = []
    for site in sorted(support):
        up, down = final[site]
        rows.append((site, up, down, up.abs2() + down.abs2()))
    if cfg.fmt == "csv":
        header = ["x1", "x2", "x3", "up_re", "up_im", "down_re", "down_im", "probability"]
        body = [
            [*site, repr(up.real_float()), repr(up.imag_float()), repr(down.real_float()),
             repr(down.imag_float()), repr(prob.real_float())]
            for site, up, down, prob in rows
        ]
        _emit(cfg, _csv_text(header, body))
    else:
        out = {
            "t": cfg.t,
            "chirality": cfg.chirality.symbol,
            "rows": [
                {
                    "x": list(site),
                    "up": up.to_json(),
                    "down": down.to_json(),
                    "probability": prob.to_json(),
                    "probability_float": prob.real_float(),
                }
                for site, up, down, prob in rows
            ],
        }
        _emit(cfg, _dump_json(out))
    return EXIT_OK


def cmd_cone(cfg: RunConfig) -> int:
    table = cone_table(cfg.t, cfg.chirality, jobs=cfg.jobs)
    props = [
        Propagator(cfg.source, cfg.source + d, cfg.t, cfg.chirality, m) for d, m in table.items()
    ]
    if cfg.fmt == "csv":
        _emit(cfg, _csv_text(_PROP_HEADER, (row for p in props for row in _propagator_rows(p))))
    else:
        _emit(cfg, _dump_json({"t": cfg.t, "chirality": cfg.chirality.symbol, "propagators": [p.to_json() for p in props]}))
    return EXIT_OK


def _run_one(name: str, scale: str, seed: int, fault: bool):
    table_for = faulty_table_factory() if fault else None
    t0 = time.perf_counter()
    res = run_suite(name, scale=scale, seed=seed, table_for=table_for)
    return res, time.perf_counter() - t0


def cmd_verify(cfg: RunConfig, suites: Optional[Sequence[str]] = None, scale: str = "default", fault: bool = False) -> int:
    names = list(suites) if suites else list(SUITES)
    args = [(n, scale, cfg.seed, fault) for n in names]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(_run_one, *zip(*args)))
    else:
        outcomes = [_run_one(*a) for a in args]
    report = []
    first_failure = None
    for res, secs in outcomes:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.description} (checked {res.checked}, {secs:.2f}s)")
        entry = {"suite": res.name, "passed": res.passed, "checked": res.checked}
        if not res.passed:
            entry["counterexample"] = res.counterexample
            if first_failure is None:
                first_failure = entry
        report.append(entry)
    if first_failure is not None:
        print(json.dumps({"first_counterexample": first_failure}, sort_keys=True), file=sys.stderr)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(_dump_json({"scale": scale, "seed": cfg.seed, "suites": report}))
    return EXIT_OK if first_failure is None else EXIT_VERIFY_FAILED


def _bench_ts(t_max: int) -> list[int]:
    ts = set(range(1, min(t_max, 8) + 1))
    t = 16
    while t < t_max:
        ts.add(t)
        t *= 2
    if t_max >= 1:
        ts.add(t_max)
    return sorted(ts)


def _size_stats(m) -> dict:
    bits = max(max(abs(x.re).bit_length(), abs(x.im).bit_length()) for x in m.entries())
    return {"max_numerator_bits": bits, "max_log2_den": max(x.d for x in m.entries())}


def cmd_bench(cfg: RunConfig, t_max: int = 8, step_max: int = 30) -> int:
    if t_max < 0 or step_max < 0:
        raise UsageError("--t-max and --step-max must be non-negative")
    rng = random.Random(cfg.seed)
    origin = Site(0, 0, 0)
    rows = []
    for t in _bench_ts(t_max):
        target = origin + tuple(rng.randrange(-t, t + 1, 2) for _ in range(3))
        row = {"t": t, "target": list(target), "engines": {}}
        t0 = time.perf_counter()
        closed = propagator_closed_form(origin, target, t, cfg.chirality).matrix
        row["engines"]["closed_form"] = {"seconds": time.perf_counter() - t0}
        row["entries"] = closed.to_json()
        row["size"] = _size_stats(closed)
        agree = True
        try:
            t0 = time.perf_counter()
            brute = propagator_brute_force(origin, target, t, cfg.chirality, cfg.budget).matrix
            row["engines"]["brute_force"] = {"seconds": time.perf_counter() - t0}
            agree &= brute == closed
        except BudgetExceeded:
            row["engines"]["brute_force"] = {"skipped": "over budget"}
        if t <= step_max:
            t0 = time.perf_counter()
            stepped = propagator_from_evolution(origin, target, t, cfg.chirality).matrix
            row["engines"]["step"] = {"seconds": time.perf_counter() - t0}
            agree &= stepped == closed
        else:
            row["engines"]["step"] = {"skipped": "above --step-max"}
        row["engines_agree"] = agree
        rows.append(row)
    report = {"chirality": cfg.chirality.symbol, "seed": cfg.seed, "budget": cfg.budget, "rows": rows}
    _emit(cfg, _dump_json(report))
    return EXIT_OK if all(r["engines_agree"] for r in rows) else EXIT_VERIFY_FAILED


_VALUE_FLAGS = ("--from", "--to", "--chi")


def _attach_values(argv: Sequence[str]) -> list[str]:
    """Glue ``--to -1,3,1`` into ``--to=-1,3,1`` so argparse does not read the value as a flag."""
    out = []
    it = iter(argv)
    for arg in it:
        if arg in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(arg if nxt is None else f"{arg}={nxt}")
        else:
            out.append(arg)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(_attach_values(sys.argv[1:] if argv is None else argv))
    try:
        cfg = RunConfig(
            command=ns.command,
            chirality=ns.chi,
            t=getattr(ns, "t", 0),
            source=getattr(ns, "source", None),
            target=getattr(ns, "target", None),
            fmt=ns.fmt,
            out=ns.out,
            budget=ns.budget,
            jobs=ns.jobs,
            seed=ns.seed,
        )
        if ns.command == "propagate":
            return cmd_propagate(cfg, ns.engine, ns.strict)
        if ns.command == "evolve":
            return cmd_evolve(cfg, ns.state, ns.engine)
        if ns.command == "cone":
            return cmd_cone(cfg)
        if ns.command == "verify":
            return cmd_verify(cfg, ns.suite, ns.scale, ns.inject_fault)
        return cmd_bench(cfg, ns.t_max, ns.step_max)
    except UsageError as exc:
        print(f"weylwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"weylwalk: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BudgetExceeded as exc:
        print(f"weylwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
