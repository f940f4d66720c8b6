"""Command-line interface: ``aisbn {infer,benchmark,validate,exact}``.

Exit codes: 0 success, 2 parse/validation error, 3 impossible evidence,
4 zero-mass, 5 sample cap still binding after all restarts. Errors are
reported on stderr as a one-line JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .benchmark import run_benchmark
from .engine import ConfigError, EngineConfig, ZeroMassError, infer_posteriors
from .formats import (CONFIG_KEYS, ParseError, config_from_dict, dumps, parse_assignment_pairs,
                      posterior_run_to_dict, read_assignment_file, read_network)
from .network import AssignmentError
from .oracle import ImpossibleEvidenceError, OracleCapacityError, exact_event_probability, exact_posterior

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_IMPOSSIBLE = 3
EXIT_ZERO_MASS = 4
EXIT_CAPPED = 5


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        self.code, self.kind, self.message = code, kind, message
        super().__init__(message)


def _fail(exc: CliError) -> int:
    sys.stderr.write(json.dumps({"error": exc.kind, "exit_code": exc.code, "message": exc.message}) + "\n")
    return exc.code


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _assignments(pairs, files, what: str) -> dict[str, str]:
    items = parse_assignment_pairs(pairs or [], source=f"--{what}")
    for path in files or []:
        items += read_assignment_file(path)
    out: dict[str, str] = {}
    for node, state in items:
        if out.get(node, state) != state:
            raise CliError(EXIT_PARSE, "conflicting-assignment",
                           f"{what} gives conflicting states for node {node!r}")
        out[node] = state
    return out


def _load_net(path: str):
    try:
        return read_network(path)
    except OSError as exc:
        raise CliError(EXIT_PARSE, "io", str(exc)) from None
    except ParseError as exc:
        raise CliError(EXIT_PARSE, "parse", str(exc)) from None


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_config_flags(p: argparse.ArgumentParser):
    types = {f.name: f.type for f in fields(EngineConfig)}
    for key, attr in CONFIG_KEYS.items():
        kind = str(types[attr])
        if "bool" in kind:
            p.add_argument(_flag(key), dest=key, action=argparse.BooleanOptionalAction, default=None)
        elif "int" in kind:
            p.add_argument(_flag(key), dest=key, type=int, default=None)
        elif "float" in kind:
            p.add_argument(_flag(key), dest=key, type=float, default=None)
        else:
            p.add_argument(_flag(key), dest=key, default=None)


def _config(args) -> tuple[EngineConfig, int | None]:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(EXIT_PARSE, "io", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_PARSE, "parse", f"{args.config}: line {exc.lineno}: {exc.msg}") from None
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        return config_from_dict(doc)
    except ParseError as exc:
        raise CliError(EXIT_PARSE, "config", str(exc)) from None


def run_infer(network: str, evidence: dict[str, str], queries: list[tuple[str, str]],
              cfg: EngineConfig, seed: int | None, output: str | None) -> int:
    net = _load_net(network)
    try:
        ev = net.resolve(evidence)
        for node, state in queries:
            net.resolve({node: state})
    except AssignmentError as exc:
        raise CliError(EXIT_PARSE, "assignment", str(exc)) from None
    try:
        run = infer_posteriors(net, ev, queries, cfg, seed)
    except ImpossibleEvidenceError as exc:
        raise CliError(EXIT_IMPOSSIBLE, "impossible-evidence", str(exc)) from None
    except ZeroMassError as exc:
        raise CliError(EXIT_ZERO_MASS, "zero-mass", str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, "input", str(exc)) from None
    doc = posterior_run_to_dict(net, ev, run, cfg, seed, Path(network).name)
    _emit(dumps(doc), output)
    reports = [run.evidence_report] + [r.report for r in run.results if r.report is not None]
    if any(r.terminated_by != "required-samples-met" for r in reports):
        sys.stderr.write(json.dumps({"error": "cap-exhausted", "exit_code": EXIT_CAPPED,
                                     "message": "sample cap reached after all restarts"}) + "\n")
        return EXIT_CAPPED
    return EXIT_OK


def _cmd_infer(args) -> int:
    cfg, seed = _config(args)
    evidence = _assignments(args.evidence, args.evidence_file, "evidence")
    queries = list(_assignments(args.query, args.query_file, "query").items())
    return run_infer(args.network, evidence, queries, cfg, seed, args.output)


def _cmd_validate(args) -> int:
    net = _load_net(args.network)
    _emit(dumps({"valid": True, "nodes": len(net), "topological_order":
                 [net.nodes[i].id for i in net.topo_order]}), args.output)
    return EXIT_OK


def _cmd_exact(args) -> int:
    net = _load_net(args.network)
    evidence = _assignments(args.evidence, args.evidence_file, "evidence")
    queries = list(_assignments(args.query, args.query_file, "query").items())
    try:
        pe = exact_event_probability(net, evidence, cap=args.cap)
        doc = {"evidence": evidence, "evidence_probability": pe.probability,
               "terms_enumerated": pe.terms_enumerated, "queries": []}
        for node, state in queries:
            doc["queries"].append({"node": node, "state": state,
                                   "posterior": exact_posterior(net, {node: state}, evidence, cap=args.cap)})
    except AssignmentError as exc:
        raise CliError(EXIT_PARSE, "assignment", str(exc)) from None
    except OracleCapacityError as exc:
        raise CliError(EXIT_PARSE, "oracle-capacity", str(exc)) from None
    except ImpossibleEvidenceError as exc:
        raise CliError(EXIT_IMPOSSIBLE, "impossible-evidence", str(exc)) from None
    _emit(dumps(doc), args.output)
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    try:
        suite = json.loads(Path(args.suite).read_text())
    except OSError as exc:
        raise CliError(EXIT_PARSE, "io", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, "parse", f"{args.suite}: line {exc.lineno}: {exc.msg}") from None
    if args.seed is not None:
        suite["seed"] = args.seed
    try:
        report = run_benchmark(suite)
    except (OracleCapacityError, ConfigError, ParseError) as exc:
        raise CliError(EXIT_PARSE, "suite", str(exc)) from None
    _emit(dumps(report), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aisbn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def assignment_flags(p):
        p.add_argument("--evidence", "-e", nargs="*", default=[], metavar="NODE=STATE")
        p.add_argument("--evidence-file", action="append", default=[])
        p.add_argument("--query", "-q", nargs="*", default=[], metavar="NODE=STATE")
        p.add_argument("--query-file", action="append", default=[])

    p = sub.add_parser("infer", help="posterior probabilities with relative-error guarantees")
    p.add_argument("network")
    assignment_flags(p)
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("benchmark", help="synthetic oracle-checked benchmark suite")
    p.add_argument("suite", help="suite configuration JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("validate", help="parse and validate a network document")
    p.add_argument("network")
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("exact", help="exact probabilities by enumeration")
    p.add_argument("network")
    assignment_flags(p)
    p.add_argument("--cap", type=int, default=2**24)
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_exact)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc)
    except ParseError as exc:
        return _fail(CliError(EXIT_PARSE, "parse", str(exc)))


if __name__ == "__main__":
    sys.exit(main())
