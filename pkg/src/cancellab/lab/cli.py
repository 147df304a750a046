"""Command line entry point.

    cancellab verify danielewski --out r.json
    cancellab verify theorem1 --d 1 --dprime 2 --l 2
    cancellab recheck r.json
    cancellab ring check map.json
    cancellab lnd check der.json

Exit status: 0 when everything verified, 2 when something stopped at a search
bound, 1 on failure or bad input.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .. import gb
from ..errors import BoundExceeded, LabError, ResourceBudgetExceeded
from ..lnd import Derivation, check_locally_nilpotent, verify_derivation
from ..ring import PresentedRing, RingMap, verify_iso, verify_map
from .report import recheck_report
from .scenarios import SCENARIOS, LabConfig

EXIT_OK, EXIT_FAIL, EXIT_BOUND = 0, 1, 2


def _scenario_kwargs(name: str, args) -> dict:
    params = inspect.signature(SCENARIOS[name]).parameters
    out = {}
    for key in ("d", "dprime", "l", "k"):
        val = getattr(args, key)
        if val is not None:
            if key not in params:
                raise ValueError(f"scenario {name!r} takes no --{key}")
            out[key] = val
    return out


def _config(args) -> LabConfig:
    return LabConfig(max_degree=args.max_degree, max_depth=args.max_depth, order=args.order, route=args.route,
                     timings=args.timings)


def _run_one(name: str, kwargs: dict, config: LabConfig, budget: tuple) -> str:
    gb.set_default_budget(*budget)
    return SCENARIOS[name](config=config, **kwargs).dumps()


def cmd_verify(args) -> int:
    unknown = [s for s in args.scenario if s not in SCENARIOS]
    if unknown:
        print(f"unknown scenario(s): {', '.join(unknown)}; choose from {', '.join(SCENARIOS)}", file=sys.stderr)
        return EXIT_FAIL
    try:
        jobs = [(s, _scenario_kwargs(s, args)) for s in args.scenario]
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FAIL
    config = _config(args)
    budget = (args.max_steps, args.max_total_degree)
    gb.set_default_budget(*budget)
    if len(jobs) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(min(args.jobs, len(jobs))) as ex:
            texts = list(ex.map(_run_one, *zip(*jobs), [config] * len(jobs), [budget] * len(jobs)))
    else:
        # a single scenario spends the workers on S-polynomial reduction instead
        gb.set_default_workers(args.jobs)
        texts = [_run_one(s, kw, config, budget) for s, kw in jobs]
    reports = [json.loads(t) for t in texts]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(texts[0] if len(texts) == 1 else json.dumps(reports, sort_keys=True, indent=1) + "\n")
    codes = []
    for rep in reports:
        for c in rep["claims"]:
            line = f"[{c['status']}] {rep['scenario']}: {c['name']}"
            if c.get("reason"):
                line += f"  ({c['reason']})"
            print(line)
        codes.append(_status_code({c["status"] for c in rep["claims"]}))
    return max(codes, key=lambda c: (c == EXIT_FAIL, c == EXIT_BOUND))


def _status_code(statuses: set) -> int:
    if "failed" in statuses:
        return EXIT_FAIL
    if "inconclusive-at-bound" in statuses:
        return EXIT_BOUND
    return EXIT_OK


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_recheck(args) -> int:
    try:
        data = _load(args.file)
    except (OSError, ValueError) as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    reports = data if isinstance(data, list) else [data]
    ok = True
    for rep in reports:
        for name, good, msg in recheck_report(rep):
            ok &= good
            print(f"[{'ok' if good else 'FAIL'}] {rep['scenario']}: {name}: {msg}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ring_check(args) -> int:
    try:
        data = _load(args.file)
        if "forward" in data:
            cert = verify_iso(RingMap.from_json(data["forward"]), RingMap.from_json(data["backward"]))
            print("isomorphism verified")
            print(json.dumps(cert.to_json(), sort_keys=True, indent=1))
        elif "images" in data:
            f = verify_map(RingMap.from_json(data))
            print("homomorphism verified")
            print(json.dumps([c.to_json() for c in f.relation_certificates], sort_keys=True, indent=1))
        else:
            R = PresentedRing.from_json(data)
            if R.inconsistent:
                print("presentation is inconsistent (1 is in the relation ideal)")
                return EXIT_FAIL
            print("consistent presentation; reduced Groebner basis:")
            for g in R.gb.generators:
                print("  " + g.format())
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except LabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_lnd_check(args) -> int:
    try:
        data = _load(args.file)
        D = Derivation.from_json(data)
        verify_derivation(D)
        cert = check_locally_nilpotent(D, args.bound if args.bound is not None else data.get("bound"))
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (BoundExceeded, ResourceBudgetExceeded) as exc:
        print(f"inconclusive: {type(exc).__name__}: {exc}")
        return EXIT_BOUND
    except LabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("locally nilpotent derivation")
    for v in D.ring.vars:
        print(f"  D^{cert.length(v)}({v}) = 0")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cancellab", description="Certified cancellation computations.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run named scenarios and write a report")
    v.add_argument("scenario", nargs="+", help=", ".join(SCENARIOS))
    for key in ("d", "dprime", "l", "k"):
        v.add_argument(f"--{key}", type=int)
    v.add_argument("--max-degree", type=int, help="slice/matching degree bound (disables the retry)")
    v.add_argument("--max-depth", type=int, help="matching congruence depth")
    v.add_argument("--max-steps", type=int, help="Groebner reduction-step budget")
    v.add_argument("--max-total-degree", type=int, help="Groebner basis degree budget")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--order", choices=["grevlex", "lex"], default="grevlex")
    v.add_argument("--route", choices=["upstairs", "direct"], default="upstairs",
                   help="theorem1/corollary3: search on the equivariant cover or directly on U")
    v.add_argument("--timings", action="store_true", help="record wall times (reports stop being byte-stable)")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("recheck", help="re-expand every certificate in a report")
    r.add_argument("file")
    r.set_defaults(func=cmd_recheck)

    rg = sub.add_parser("ring", help="presented rings and maps")
    rg_sub = rg.add_subparsers(dest="action", required=True)
    rc = rg_sub.add_parser("check", help="check a ring, a map, or a forward/backward pair")
    rc.add_argument("file")
    rc.set_defaults(func=cmd_ring_check)

    ln = sub.add_parser("lnd", help="derivations")
    ln_sub = ln.add_subparsers(dest="action", required=True)
    lc = ln_sub.add_parser("check", help="check well-definedness and local nilpotency")
    lc.add_argument("file")
    lc.add_argument("--bound", type=int)
    lc.set_defaults(func=cmd_lnd_check)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_FAIL
    return args.func(args)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
