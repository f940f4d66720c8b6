"""JSON documents for networks, run configurations and reports.

Network document::

    {"format": "aisbn-network", "version": 1,
     "nodes": [{"id": "A", "states": ["a0", "a1"], "parents": [],
                "cpt": [0.5, 0.5]}, ...]}

``cpt`` is flat: parent configurations row-major in declared parent order
(first parent slowest), child state fastest within a row.

All documents are written with sorted keys and fixed indentation so that
equal content gives equal bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Iterable

from .engine import EngineConfig, EstimateReport, PosteriorRun
from .network import BayesNet, NodeSpec, validate

NETWORK_FORMAT = "aisbn-network"
REPORT_FORMAT = "aisbn-report"
FORMAT_VERSION = 1

# config file key -> EngineConfig field
CONFIG_KEYS = {
    "epsilon_r": "eps_r",
    "delta": "delta",
    "updating_interval": "interval",
    "threshold": "threshold",
    "warmup_stages": "warmup_stages",
    "query_warmup_stages": "query_warmup_stages",
    "sample_cap": "sample_cap",
    "max_restarts": "max_restarts",
    "restart_strategy_switch": "restart_strategy_switch",
    "algorithm": "algorithm",
    "interleave_learning": "interleave_learning",
    "reuse_learned_importance": "reuse_learned_importance",
    "p_floor": "p_floor",
    "init_strategy": "init_strategy",
    "mu_bound": "mu_bound",
    "fixed_eta": "fixed_eta",
}


class ParseError(ValueError):
    """Document could not be turned into a valid object.

    `errors` is a list of (location, message) pairs; a location is either
    ``line L, column C`` for syntax errors or a JSON path.
    """

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in errors))


def dumps(doc: Any) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(x):
    # JSON has no infinities; non-finite floats become null
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError([(f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from None


def network_to_dict(net: BayesNet) -> dict:
    return {
        "format": NETWORK_FORMAT,
        "version": FORMAT_VERSION,
        "nodes": [
            {"id": n.id, "states": list(n.states), "parents": list(n.parents),
             "cpt": n.cpt.ravel().tolist()}
            for n in net.nodes
        ],
    }


def serialize_network(net: BayesNet) -> str:
    return dumps(network_to_dict(net))


def parse_network(text: str) -> BayesNet:
    """Parse and validate a network document; raises ParseError with locations."""
    doc = _load_json(text)
    errors: list[tuple[str, str]] = []
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise ParseError([("$", "expected an object with a 'nodes' list")])
    if doc.get("format", NETWORK_FORMAT) != NETWORK_FORMAT:
        errors.append(("$.format", f"expected {NETWORK_FORMAT!r}"))
    specs = []
    for k, raw in enumerate(doc["nodes"]):
        loc = f"$.nodes[{k}]"
        if not isinstance(raw, dict):
            errors.append((loc, "node must be an object"))
            continue
        missing = [key for key in ("id", "states", "cpt") if key not in raw]
        if missing:
            errors.append((loc, f"missing keys {missing}"))
            continue
        states, parents, cpt = raw["states"], raw.get("parents", []), raw["cpt"]
        if not isinstance(states, list) or not states:
            errors.append((f"{loc}.states", "expected a nonempty list"))
            continue
        if not isinstance(parents, list):
            errors.append((f"{loc}.parents", "expected a list"))
            continue
        if not isinstance(cpt, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in cpt
        ):
            errors.append((f"{loc}.cpt", "expected a flat list of numbers"))
            continue
        specs.append((loc, NodeSpec(str(raw["id"]), states, tuple(str(p) for p in parents), cpt)))
    ids = {spec.id: loc for loc, spec in specs}
    for loc, spec in specs:
        for j, p in enumerate(spec.parents):
            if p not in ids:
                errors.append((f"{loc}.parents[{j}]", f"unknown node reference {p!r}"))
    if errors:
        raise ParseError(errors)
    net = BayesNet([s for _, s in specs], check=False)
    for violation in validate(net):
        loc = "$"
        for nloc, spec in specs:
            if f"node {spec.id!r}" in violation:
                loc = nloc
                break
        errors.append((loc, violation))
    if errors:
        raise ParseError(errors)
    return BayesNet([s for _, s in specs])


def read_network(path: str | Path) -> BayesNet:
    return parse_network(Path(path).read_text())


def config_to_dict(cfg: EngineConfig, seed: int | None = None) -> dict:
    out = {key: getattr(cfg, attr) for key, attr in CONFIG_KEYS.items()}
    out["delta_s_table"] = [
        {"delta": d, "epsilon_r": e, "delta_s": ds}
        for (d, e), ds in sorted((cfg.delta_s_table or {}).items())
    ]
    out["seed"] = seed
    return out


def config_from_dict(doc: dict, base: EngineConfig = EngineConfig()) -> tuple[EngineConfig, int | None]:
    if not isinstance(doc, dict):
        raise ParseError([("$", "config must be an object")])
    unknown = set(doc) - set(CONFIG_KEYS) - {"seed", "delta_s_table"}
    if unknown:
        raise ParseError([(f"$.{k}", "unknown config key") for k in sorted(unknown)])
    kwargs = {attr: doc[key] for key, attr in CONFIG_KEYS.items() if key in doc}
    if doc.get("delta_s_table"):
        try:
            kwargs["delta_s_table"] = {
                (float(r["delta"]), float(r["epsilon_r"])): float(r["delta_s"])
                for r in doc["delta_s_table"]
            }
        except (KeyError, TypeError) as exc:
            raise ParseError([("$.delta_s_table", f"bad entry: {exc}")]) from None
    values = {f.name: getattr(base, f.name) for f in fields(base)}
    values.update(kwargs)
    try:
        cfg = EngineConfig(**values)
    except (ValueError, TypeError) as exc:
        raise ParseError([("$", str(exc))]) from None
    return cfg, doc.get("seed")


def parse_config(text: str) -> tuple[EngineConfig, int | None]:
    return config_from_dict(_load_json(text))


def parse_assignment_pairs(pairs: Iterable[str], source: str = "argument") -> list[tuple[str, str]]:
    """Parse ``node=state`` strings; blank items and ``#`` comments are skipped."""
    out = []
    for k, item in enumerate(pairs):
        item = item.split("#", 1)[0].strip()
        if not item:
            continue
        node, sep, state = item.partition("=")
        if not sep or not node.strip() or not state.strip():
            raise ParseError([(f"{source} {k + 1}", f"expected node=state, got {item!r}")])
        out.append((node.strip(), state.strip()))
    return out


def read_assignment_file(path: str | Path) -> list[tuple[str, str]]:
    return parse_assignment_pairs(Path(path).read_text().splitlines(), source=f"{path} line")


def stage_to_dict(stage) -> dict:
    return asdict(stage)


def estimate_report_to_dict(report: EstimateReport) -> dict:
    return {
        "estimate": report.estimate,
        "terminated_by": report.terminated_by,
        "restarts": report.restarts,
        "init_strategy": report.init_strategy,
        "total_samples": report.total_samples,
        "estimation_samples": report.estimation_samples,
        "n_required": report.n_required,
        "gamma": report.gamma,
        "degenerate_flags": list(report.degenerate_flags),
        "stages": [stage_to_dict(s) for s in report.stages],
    }


def posterior_run_to_dict(net: BayesNet, evidence: dict[int, int], run: PosteriorRun,
                          cfg: EngineConfig, seed: int | None, network_name: str) -> dict:
    return {
        "format": REPORT_FORMAT,
        "version": FORMAT_VERSION,
        "network": network_name,
        "seed": seed,
        "config": config_to_dict(cfg, seed),
        "evidence": net.labels(evidence),
        "evidence_probability": estimate_report_to_dict(run.evidence_report),
        "queries": [
            {
                "node": r.node,
                "state": r.state,
                "posterior": r.posterior,
                "relative_error_bounds": {
                    "lower": r.bounds.lower,
                    "upper": r.bounds.upper,
                    "confidence": r.bounds.confidence,
                },
                "joint_probability": None if r.report is None else estimate_report_to_dict(r.report),
            }
            for r in run.results
        ],
    }


def _schema(name: str) -> dict:
    return json.loads((Path(__file__).parent / "schemas" / name).read_text())


def report_schema() -> dict:
    return _schema("report.schema.json")


def network_schema() -> dict:
    return _schema("network.schema.json")
