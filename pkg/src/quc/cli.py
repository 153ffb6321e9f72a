"""Command-line entry point: ``quc {dcpf,brute,qaoa,verify,report-width}``.

Exit codes: 0 success, 1 a verification suite failed, 2 configuration or
parse error, 3 budget or feasibility refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .fixtures import load_grid, load_instance
from .grid import GridError, build_b_matrix, injection_vector, solve_dcpf
from .qaoa import AnsatzConfig, BudgetError, optimize, width_depth_report
from .uc import MAX_BRUTE_BITS, UCError, brute_force, dispatch_init

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REFUSED = 0, 1, 2, 3


class Refusal(RuntimeError):
    pass


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--grid", default=d(None), help="grid JSON (default: bundled appendix grid)")
    parser.add_argument("--uc", default=d(None), help="unit-commitment JSON (default: bundled appendix)")
    parser.add_argument("--out", default=d(None), help="write output here instead of stdout")
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))


def _parse_injections(text: str, order: list[str]) -> np.ndarray:
    """``id=value,...`` by node id, or a plain list in B-matrix order."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if parts and all("=" in p for p in parts):
        vec = np.zeros(len(order))
        for p in parts:
            key, val = p.split("=", 1)
            if key not in order:
                raise ValueError(f"unknown node id {key!r}")
            vec[order.index(key)] = float(val)
        return vec
    vals = np.array([float(p) for p in parts])
    if vals.size != len(order):
        raise ValueError(f"expected {len(order)} injections in order {order}")
    return vals


def _load_P(source: str, instance) -> np.ndarray:
    if source == "dispatch":
        return dispatch_init(instance).P
    P = np.array(json.loads(Path(source).read_text()), dtype=float)
    if P.shape != (instance.n_gens, instance.timesteps):
        raise ValueError(f"P file has shape {P.shape}, expected {(instance.n_gens, instance.timesteps)}")
    return P


# --- commands --------------------------------------------------------------

def cmd_dcpf(args) -> tuple[dict, list[dict]]:
    grid = load_grid(args.grid) if args.grid or not args.uc else load_instance(args.uc).grid
    bmat = build_b_matrix(grid)
    if args.injections is not None:
        p = _parse_injections(args.injections, bmat.order)
    else:
        inst = load_instance(args.uc, args.grid)
        sched = dispatch_init(inst)
        p = injection_vector(bmat, sched.P[:, args.t], args.t, sched.u[:, args.t])
    flow = solve_dcpf(bmat, p)
    rows = [
        {"line": k, "a": ln.a, "b": ln.b, "flow": flow.line_flows[k], "cost": flow.trans_costs[k]}
        for k, ln in enumerate(grid.lines)
    ]
    rec = {
        "order": bmat.order,
        "injections": p,
        "theta": flow.theta,
        "line_flows": flow.line_flows,
        "line_costs": flow.trans_costs,
        "total_cost": float(np.sum(flow.trans_costs)),
    }
    return rec, rows


def cmd_brute(args) -> tuple[dict, list[dict]]:
    inst = load_instance(args.uc, args.grid)
    if inst.n_bits > MAX_BRUTE_BITS:
        raise Refusal(f"n*T = {inst.n_bits} exceeds the brute-force limit {MAX_BRUTE_BITS}")
    P = _load_P(args.P, inst)
    sched, cost = brute_force(inst, P)
    gens = [g.id for g in inst.grid.generators]
    rows = [
        {"generator": gid, "t": t, "u": int(sched.u[i, t]), "P": sched.P[i, t]}
        for t in range(inst.timesteps) for i, gid in enumerate(gens)
    ]
    rec = {
        "bitstring": sched.bitstring(),
        "generators": gens,
        "u": sched.u,
        "P": sched.P,
        "cost": cost.as_dict(),
    }
    return rec, rows


def cmd_qaoa(args) -> tuple[dict, list[dict]]:
    inst = load_instance(args.uc, args.grid)
    backend = {"faithful": "faithful_circuit", "oracle": "diagonal_oracle"}[args.backend]
    cfg = AnsatzConfig(
        layers=args.layers, backend=backend, k_pen=args.k_pen, k_hhl=args.k_hhl,
        k_qadc=args.k_qadc, shots=args.shots, seed=args.seed,
    )
    report = optimize(inst, cfg, budget=args.budget, restarts=args.restarts)
    rec = report.to_dict()
    if args.histogram:
        rows = [{"bitstring": b, "count": c} for b, c in sorted(report.histogram.items())]
        Path(args.histogram).write_text(io.to_csv(rows))
    return rec, [{"evaluation": i, "expected_cost": v} for i, v in report.trace]


def cmd_report_width(args) -> tuple[dict, list[dict]]:
    inst = load_instance(args.uc, args.grid)
    cfg = AnsatzConfig(
        layers=1, backend="faithful_circuit", k_pen=args.k_pen, k_hhl=args.k_hhl, k_qadc=args.k_qadc,
    )
    rec = width_depth_report(inst, cfg).to_dict()
    rec["qubit_cap"] = cfg.qubit_cap
    rec["fits_simulator"] = rec["width"] <= cfg.qubit_cap
    rows = [{"key": k, "value": v} for k, v in rec.items() if not isinstance(v, dict)]
    return rec, rows


def cmd_verify(args) -> tuple[dict, list[dict]]:
    from . import verify as V

    name = args.subroutine
    if name == "getdiff":
        rec = V.verify_getdiff(args.trials, args.seed)
    elif name == "adder":
        rec = V.verify_adder(args.max_controls, args.width or 4, seed=args.seed)
    elif name == "hhl":
        inst = load_instance(args.uc, args.grid)
        order = inst.bmat.order
        if args.injections:
            p = _parse_injections(args.injections, order)
        else:
            sched = dispatch_init(inst)
            p = injection_vector(inst.bmat, sched.P[:, 0], 0, sched.u[:, 0])
        ks = [int(k) for k in args.k_hhl_list.split(",")]
        rec = V.verify_hhl(inst, p, ks)
    elif name == "qadc":
        rec = V.verify_qadc(args.a, args.prec)
    elif name == "geigen":
        rec = V.verify_geigen(args.a)
    elif name == "cosphase":
        rec = V.verify_cosphase(args.width or 4, args.gamma_prime)
    else:  # costdiag
        inst = load_instance(args.uc or _bundled("toy_uc.json"), args.grid)
        P = _load_P(args.P, inst)
        rec = V.verify_costdiag(
            inst, P, args.gamma, args.k_pen, args.k_hhl, args.k_qadc, faithful=not args.oracle_only
        )
    rec = {"subroutine": name, **rec}
    return rec, [{"key": k, "value": v} for k, v in rec.items()]


def _bundled(name: str) -> str:
    return str(Path(__file__).parent / "data" / name)


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quc", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(fn=fn)
        return p

    p = add("dcpf", cmd_dcpf, "DC power flow for given injections or the dispatch schedule")
    p.add_argument("--injections", help="id=MW,... or a list in B-matrix order")
    p.add_argument("--t", type=int, default=0, help="timestep when injections come from dispatch")

    p = add("brute", cmd_brute, "exhaustive unit-commitment optimum")
    p.add_argument("--P", default="dispatch", help="'dispatch' or a JSON file holding P[i][t]")

    p = add("qaoa", cmd_qaoa, "run the QAOA parameter search")
    p.add_argument("--backend", choices=("faithful", "oracle"), default="oracle")
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--k-pen", type=int, default=5)
    p.add_argument("--k-hhl", type=int, default=7)
    p.add_argument("--k-qadc", type=int, default=6)
    p.add_argument("--budget", type=int, default=200, help="expected-cost evaluations")
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--histogram", help="also write the best histogram as CSV here")

    p = add("verify", cmd_verify, "run a subroutine oracle-comparison suite")
    p.add_argument(
        "subroutine", choices=("getdiff", "adder", "hhl", "qadc", "geigen", "cosphase", "costdiag")
    )
    p.add_argument("--a", type=float, default=0.3)
    p.add_argument("--prec", type=int, default=6)
    p.add_argument("--width", type=int)
    p.add_argument("--gamma-prime", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-controls", type=int, default=6)
    p.add_argument("--injections")
    p.add_argument("--k-hhl-list", default="6,7,8")
    p.add_argument("--gamma", type=float, default=1e-5)
    p.add_argument("--P", default="dispatch")
    p.add_argument("--k-pen", type=int, default=3)
    p.add_argument("--k-hhl", type=int, default=5)
    p.add_argument("--k-qadc", type=int, default=5)
    p.add_argument("--oracle-only", action="store_true")

    p = add("report-width", cmd_report_width, "qubit and depth accounting of one faithful layer")
    p.add_argument("--k-pen", type=int, default=5)
    p.add_argument("--k-hhl", type=int, default=7)
    p.add_argument("--k-qadc", type=int, default=6)
    return parser


def _emit(args, rec: dict, rows: list[dict]) -> None:
    text = io.to_csv(rows) if args.format == "csv" else io.to_json(rec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rec, rows = args.fn(args)
    except json.JSONDecodeError as exc:
        print(f"error: {exc.msg} at line {exc.lineno} column {exc.colno}", file=sys.stderr)
        return EXIT_CONFIG
    except (Refusal, BudgetError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (FileNotFoundError, KeyError, ValueError, GridError, UCError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(args, rec, rows)
    if args.command == "verify" and not rec.get("pass", False):
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
