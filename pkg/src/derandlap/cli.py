"""Command-line surface tying the pipeline together.

Exit codes: 0 success, 1 input error (files, flags, formats), 2 contract
violation (disconnected graph without --auto-split, right-hand side outside
the Laplacian's image, infeasible chain parameters, ...).  Outputs are
deterministic: identical invocations produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dsquare import ChainInfeasibleError, build_chain, chain_stats
from .expanders import ExpanderInfeasibleError, ExpanderSpec, build_expander
from .graphio import FormatError, emit_vector, parse_graph, parse_vector
from .multigraph import GraphError, regularize
from .solver import (
    ChainOptions,
    ContractError,
    approx_pinv,
    commute_time,
    escape_probabilities,
    hitting_time,
    solve,
)
from .verify import run_harness

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONTRACT = 2


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # input errors exit 1, not argparse's default 2
        raise _CliError(message, EXIT_INPUT)


def _chain_options(args) -> ChainOptions:
    return ChainOptions(mu=args.mu, k=args.k, c=args.c)


def _write_output(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _add_common(p: argparse.ArgumentParser, *, eps_default: float | None = None) -> None:
    p.add_argument("--graph", required=True, help="edge-list file (u v [mult])")
    p.add_argument("--eps", type=float, default=eps_default, required=eps_default is None)
    p.add_argument("--mu", type=float, default=None, help="chain bias override")
    p.add_argument("--k", type=int, default=None, help="chain length override")
    p.add_argument("--c", type=int, default=None, help="expander degree override")
    p.add_argument("--backend", choices=("dense", "entrywise"), default="dense")
    p.add_argument("--project", action="store_true", help="project b onto the image")
    p.add_argument("--auto-split", action="store_true", dest="auto_split")
    p.add_argument("--output", default=None, help="output path (default stdout)")
    p.add_argument("--report", choices=("json", "plain"), default="plain")
    p.add_argument("--threads", type=int, default=1, help="dense tile parallelism")


def build_parser() -> _Parser:
    ap = _Parser(prog="derandlap", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pinv", help="approximate pseudoinverse of the graph Laplacian")
    _add_common(p)
    p.add_argument(
        "--entries",
        default=None,
        help="entrywise mode: semicolon-separated i,j pairs (default: all)",
    )

    p = sub.add_parser("solve", help="solve L x = b with a relative l2 guarantee")
    _add_common(p)
    p.add_argument("--b", required=True, help="vector file, one decimal per line")

    for name in ("hit", "commute"):
        p = sub.add_parser(name, help=f"{name} time between two vertices")
        _add_common(p, eps_default=1e-3)
        p.add_argument("--u", type=int, required=True)
        p.add_argument("--v", type=int, required=True)

    p = sub.add_parser("escape", help="probabilities of reaching u before v")
    _add_common(p, eps_default=1e-3)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)

    p = sub.add_parser("expander", help="build or re-verify a biased generator multiset")
    p.add_argument("--t", type=int, default=None, help="bit width (vertices 2^t)")
    p.add_argument("--mu", type=float, default=None, help="bias bound")
    p.add_argument("--load", default=None, help="re-verify a previously emitted JSON spec")
    p.add_argument("--output", default=None)

    p = sub.add_parser("dsquare-stats", help="per-level chain statistics as JSON")
    _add_common(p, eps_default=0.1)

    p = sub.add_parser("verify", help="run the randomized property harness")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=20240901)
    p.add_argument("--output", default=None)
    return ap


def _cmd_pinv(args) -> int:
    g = parse_graph(args.graph)
    approx = approx_pinv(
        g, args.eps, chain=_chain_options(args), backend=args.backend,
        auto_split=args.auto_split,
    )
    if args.backend == "entrywise" and args.entries is not None:
        pairs = []
        for chunk in args.entries.split(";"):
            i_s, j_s = chunk.split(",")
            pairs.append((int(i_s), int(j_s)))
    else:
        pairs = None

    if args.report == "json":
        payload = {
            "eps_requested": args.eps,
            "delta": approx.delta,
            "f": approx.scale,
            "n": approx.n,
        }
        if pairs is None:
            payload["matrix"] = [[float(v) for v in row] for row in approx.as_matrix()]
        else:
            payload["entries"] = [
                {"i": i, "j": j, "value": approx.entry(i, j)} for i, j in pairs
            ]
        _write_output(_json_dump(payload), args.output)
    else:
        if pairs is None:
            lines = [" ".join(repr(float(v)) for v in row) for row in approx.as_matrix()]
            _write_output("\n".join(lines) + "\n", args.output)
        else:
            lines = [f"{i} {j} {approx.entry(i, j)!r}" for i, j in pairs]
            _write_output("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_solve(args) -> int:
    g = parse_graph(args.graph)
    b = parse_vector(args.b)
    if len(b) != g.n:
        raise _CliError(
            f"vector has {len(b)} entries but the graph has {g.n} vertices", EXIT_INPUT
        )
    rep = solve(
        g,
        b,
        args.eps,
        project=args.project,
        auto_split=args.auto_split,
        chain=_chain_options(args),
        backend=args.backend,
    )
    if args.report == "json":
        _write_output(_json_dump(rep.to_json_dict()), args.output)
    else:
        _write_output(emit_vector(rep.x), args.output)
    return EXIT_OK


def _cmd_walk(args, kind: str) -> int:
    g = parse_graph(args.graph)
    opts = _chain_options(args)
    if kind == "hit":
        value = hitting_time(g, args.u, args.v, args.eps, chain=opts)
        payload = {"kind": "hitting", "u": args.u, "v": args.v, "eps": args.eps, "value": value}
    elif kind == "commute":
        value = commute_time(g, args.u, args.v, args.eps, chain=opts)
        payload = {"kind": "commute", "u": args.u, "v": args.v, "eps": args.eps, "value": value}
    else:
        p = escape_probabilities(g, args.u, args.v, args.eps, chain=opts)
        payload = {
            "kind": "escape",
            "u": args.u,
            "v": args.v,
            "eps": args.eps,
            "p": [float(x) for x in p],
        }
    if args.report == "json":
        _write_output(_json_dump(payload), args.output)
    elif kind == "escape":
        _write_output(emit_vector(np.asarray(payload["p"])), args.output)
    else:
        _write_output(repr(payload["value"]) + "\n", args.output)
    return EXIT_OK


def _cmd_expander(args) -> int:
    if args.load is not None:
        spec = ExpanderSpec.from_json_dict(json.loads(Path(args.load).read_text()))
    else:
        if args.t is None or args.mu is None:
            raise _CliError("expander needs --t and --mu (or --load)", EXIT_INPUT)
        spec = build_expander(args.t, args.mu)
    _write_output(_json_dump(spec.to_json_dict()), args.output)
    return EXIT_OK


def _cmd_dsquare_stats(args) -> int:
    g = parse_graph(args.graph)
    reg = regularize(g)
    opts = _chain_options(args)
    if opts.derandomized:
        chain = build_chain(reg.graph, mu=opts.mu, k=opts.k, c=opts.c)
    else:
        chain = build_chain(reg.graph, k=opts.k, exact=True)
    payload = {
        "f": reg.f,
        "levels": chain_stats(chain),
        "metrics": chain.metrics.snapshot(),
    }
    _write_output(_json_dump(payload), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    summary = run_harness(instances=args.instances, seed=args.seed)
    _write_output(_json_dump(summary), args.output)
    return EXIT_OK if summary["all_passed"] else EXIT_CONTRACT


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "pinv":
            return _cmd_pinv(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command in ("hit", "commute", "escape"):
            return _cmd_walk(args, args.command)
        if args.command == "expander":
            return _cmd_expander(args)
        if args.command == "dsquare-stats":
            return _cmd_dsquare_stats(args)
        if args.command == "verify":
            return _cmd_verify(args)
        raise _CliError(f"unknown command {args.command!r}", EXIT_INPUT)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (FormatError, FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        if isinstance(e, (ContractError, GraphError)):
            print(f"contract violation: {e}", file=sys.stderr)
            return EXIT_CONTRACT
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ChainInfeasibleError, ExpanderInfeasibleError) as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
