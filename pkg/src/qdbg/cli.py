"""Command-line entry point.

Exit codes: 0 success / assertion pass, 1 usage or execution error,
2 assertion failure.
"""

import argparse
import json
import os
import sys
import time

from .errors import QdbgError, SourceError
from .engine import DebugSession, export_io_log, launch
from .qasm import parse
from .qasm.ast import SourceProgram
from .qasm.expand import format_flat
from .stats import (ExpectedDistribution, assert_distribution, run_shots,
                    tomography)


def _default_seed() -> int:
    env = os.environ.get("QDBG_SEED")
    if env is not None:
        return int(env)
    seed = int(time.time_ns()) & 0xFFFFFFFF
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _load(path: str) -> SourceProgram:
    with open(path, encoding="utf-8") as fh:
        return SourceProgram(fh.read(), origin=path)


def _parse_subset(text):
    return [int(t) for t in text.split(",")]


def _run_to(session: DebugSession, index: int):
    while session.pc < index and not session.finished():
        session.step()


def cmd_run(args) -> int:
    ast = parse(_load(args.file))
    seed = args.seed if args.seed is not None else _default_seed()
    dist = run_shots(ast, args.shots, seed)
    if args.format == "json":
        print(dist.to_json())
    else:
        for key in sorted(dist.counts):
            print(f"{key}  {dist.counts[key]}  {dist.counts[key] / dist.shots:.4f}")
    return 0


def cmd_assert(args) -> int:
    ast = parse(_load(args.file))
    seed = args.seed if args.seed is not None else _default_seed()
    with open(args.expected, encoding="utf-8") as fh:
        expected = ExpectedDistribution.from_json(fh.read())
    dist = run_shots(ast, args.shots, seed)
    param = args.threshold if args.method == "tv" else args.alpha
    verdict = assert_distribution(dist, expected, args.method, param)
    if args.format == "json":
        print(json.dumps({"method": verdict.method, "statistic": verdict.statistic,
                          "param": verdict.threshold_or_alpha,
                          "pass": verdict.passed}))
    else:
        word = "PASS" if verdict.passed else "FAIL"
        print(f"{word} {verdict.method} statistic={verdict.statistic:.6g} "
              f"param={verdict.threshold_or_alpha}")
    return 0 if verdict.passed else 2


def _print_listing(session: DebugSession):
    for i, stmt in enumerate(session.program):
        span = f"{stmt.span.line}:{stmt.span.column}" if stmt.span else "?"
        print(f"{i:4d}  {span:>8}  {format_flat(stmt)}")


def cmd_inspect(args) -> int:
    ast = parse(_load(args.file))
    seed = args.seed if args.seed is not None else _default_seed()
    session = launch(ast, seed)
    if args.list:
        _print_listing(session)
        return 0
    _run_to(session, args.at)
    kwargs = {}
    if args.subset:
        kwargs["subset"] = _parse_subset(args.subset)
    if args.kind == "clone":
        if args.samples:
            kwargs["samples"] = args.samples
        kwargs["physical"] = args.physical_clone
    report = session.inspect(args.kind, **kwargs)
    if args.format == "json":
        print(json.dumps(report))
    else:
        _print_report(args.kind, report)
    return 0


def _print_report(kind, report):
    if kind == "state":
        for row in report["amplitudes"]:
            print(f"{row['bits']}  {row['re']:.17g}  {row['im']:.17g}")
    elif kind == "factor":
        print(f"residual sigma2: {report['residual']:.3g}")
        for block in report["blocks"]:
            qs = ",".join(f"q{q}" for q in block["qubits"])
            print(f"block [{qs}]:")
            for row in block["amplitudes"]:
                print(f"  {row['bits']}  {row['re']:.6g}  {row['im']:.6g}")
    else:
        print(json.dumps(report, indent=2))


def cmd_tomo(args) -> int:
    ast = parse(_load(args.file))
    seed = args.seed if args.seed is not None else _default_seed()
    session = launch(ast, seed)
    _run_to(session, args.at)
    est = tomography(session.state, _parse_subset(args.subset),
                     None if args.exact else args.shots, seed,
                     override=args.override)
    rho = est.rho_hat.rho
    out = {"subset": list(est.subset),
           "purity": est.rho_hat.purity(),
           "rho": [[[z.real, z.imag] for z in row] for row in rho]}
    if args.format == "json":
        print(json.dumps(out))
    else:
        print(f"subset: {out['subset']}  purity: {out['purity']:.6f}")
        for row in rho:
            print("  " + "  ".join(f"{z.real:+.4f}{z.imag:+.4f}j" for z in row))
    return 0


def cmd_debug(args) -> int:
    from . import server as srv

    if args.serve:
        if args.serve == "stdio":
            srv.serve_stdio()
            return 0
        if args.serve.startswith("tcp:"):
            srv.serve_tcp(port=int(args.serve.split(":", 1)[1]))
            return 0
        print(f"bad --serve value {args.serve!r}", file=sys.stderr)
        return 1
    if args.file is None:
        print("error: debug needs a FILE or --serve", file=sys.stderr)
        return 1
    ast = parse(_load(args.file))
    seed = args.seed if args.seed is not None else _default_seed()
    session = launch(ast, seed)
    _print_listing(session)
    return _repl(session)


def _repl(session: DebugSession) -> int:
    print("commands: step [0|1] | continue | break K | clear K | "
          "inspect KIND [SUBSET] | state | log FILE | list | quit")
    while True:
        try:
            line = input("(qdbg) ").strip()
        except EOFError:
            return 0
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] in ("q", "quit", "exit"):
                return 0
            if parts[0] in ("s", "step"):
                force = int(parts[1]) if len(parts) > 1 else None
                ev = session.step(force=force)
                print(json.dumps(ev))
            elif parts[0] in ("c", "continue"):
                print(json.dumps(session.continue_run()))
            elif parts[0] == "break":
                session.set_breakpoint(int(parts[1]))
            elif parts[0] == "clear":
                session.clear_breakpoint(int(parts[1]))
            elif parts[0] == "list":
                _print_listing(session)
            elif parts[0] == "state":
                _print_report("state", session.inspect("state"))
            elif parts[0] == "log":
                export_io_log(session, parts[1])
                print(f"wrote {parts[1]}")
            elif parts[0] == "inspect":
                kwargs = {}
                if len(parts) > 2:
                    kwargs["subset"] = _parse_subset(parts[2])
                _print_report(parts[1], session.inspect(parts[1], **kwargs))
            else:
                print(f"unknown command {parts[0]!r}")
        except QdbgError as exc:
            print(f"error: {exc}")


def cmd_serve(args) -> int:
    from . import server as srv

    if args.transport == "stdio":
        srv.serve_stdio()
    else:
        port = srv.DEFAULT_PORT
        if args.transport.startswith("tcp:"):
            port = int(args.transport.split(":", 1)[1])
        print(f"listening on 127.0.0.1:{port}", file=sys.stderr)
        srv.serve_tcp(port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdbg",
                                     description="quantum program debugger")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, shots_default=None):
        p.add_argument("file", help="OpenQASM 2.0 source file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=["text", "json"], default="text")
        if shots_default is not None:
            p.add_argument("--shots", type=int, default=shots_default)

    p = sub.add_parser("run", help="run shots and print the distribution")
    common(p, shots_default=1024)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("assert", help="goodness-of-fit assertion on shot counts")
    common(p, shots_default=1024)
    p.add_argument("--expected", required=True, help="expected-distribution JSON file")
    p.add_argument("--method", choices=["tv", "chi2"], default="tv")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(fn=cmd_assert)

    p = sub.add_parser("inspect", help="run to a statement and inspect the state")
    common(p)
    p.add_argument("--at", type=int, default=0, help="flat statement index to stop at")
    p.add_argument("--kind", default="state",
                   choices=["state", "superposition", "separable", "factor",
                            "classical", "regenerate", "clone"])
    p.add_argument("--subset", help="comma-separated qubit indices")
    p.add_argument("--samples", type=int, default=0, help="clone measurement samples")
    p.add_argument("--physical-clone", action="store_true",
                   help="report the degraded post-cloning marginal for the live subset")
    p.add_argument("--list", action="store_true", help="print the flat program and exit")
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("tomo", help="tomography of a small subsystem")
    common(p, shots_default=10000)
    p.add_argument("--at", type=int, default=0)
    p.add_argument("--subset", required=True)
    p.add_argument("--exact", action="store_true", help="exact-probability mode")
    p.add_argument("--override", action="store_true",
                   help="allow an entangled subset (estimates the mixed reduced state)")
    p.set_defaults(fn=cmd_tomo)

    p = sub.add_parser("debug", help="interactive debugging session")
    p.add_argument("file", nargs="?", help="OpenQASM 2.0 source file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--serve", help="tcp:PORT or stdio instead of the local REPL")
    p.set_defaults(fn=cmd_debug)

    p = sub.add_parser("serve", help="run the debug protocol server")
    p.add_argument("--transport", default=f"tcp:{7331}",
                   help="tcp:PORT or stdio")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SourceError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except QdbgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
