"""Task-config loading.

A task config is a strict JSON document: unknown fields are rejected, all
embedded SMILES and formulas are parsed eagerly, and modifier parameters are
range-checked, so a TaskSpec that loads is a TaskSpec that runs.

    {"name": ..., "kind": "rediscovery" | "similarity" | "isomer" |
     "median" | "mpo", "target"?: ..., "target2"?: ..., "formula"?: ...,
     "modifier"?: {...}, "terms"?: [...], "aggregation"?: ...}

Modifier documents: {"shape": "gaussian", "mu": m, "sigma": s},
{"shape": "threshold", "t": t, "ascending"?: bool}, {"shape": "identity"}.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Union

from ..descriptors.modifiers import gaussian_modifier, threshold_modifier
from ..errors import InvalidTarget, SchemaError, SmilesError
from ..smiles import parse
from ..smiles.formula import parse_formula
from .oracles import (
    AGGREGATIONS,
    MPO_SELECTORS,
    MpoTerm,
    Oracle,
    TaskKind,
    TaskSpec,
    isomer_task,
    median_task,
    mpo_task,
    rediscovery_task,
    similarity_task,
)

_KIND_FIELDS = {
    TaskKind.REDISCOVERY: {"required": {"target"}, "optional": set()},
    TaskKind.SIMILARITY: {"required": {"target"}, "optional": {"modifier"}},
    TaskKind.ISOMER: {"required": {"formula"}, "optional": set()},
    TaskKind.MEDIAN: {"required": {"target", "target2"}, "optional": set()},
    TaskKind.MPO: {"required": {"terms"}, "optional": {"aggregation"}},
}

_MODIFIER_FIELDS = {
    "gaussian": {"required": {"mu", "sigma"}, "optional": set()},
    "threshold": {"required": {"t"}, "optional": {"ascending"}},
    "identity": {"required": set(), "optional": set()},
}


def _require_str(doc: Mapping[str, Any], key: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"field {key!r} must be a non-empty string")
    return value


def _require_number(doc: Mapping[str, Any], key: str) -> float:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"field {key!r} must be a number")
    return float(value)


def _check_keys(doc: Mapping[str, Any], allowed: set, context: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"unknown {context} field(s): {sorted(unknown)}")


def _check_target(doc: Mapping[str, Any], key: str) -> str:
    target = _require_str(doc, key)
    try:
        parse(target)
    except SmilesError as exc:
        raise InvalidTarget(f"{key} does not parse: {target!r} ({exc})") from exc
    return target


def _validate_modifier(doc: Any) -> Dict[str, Any]:
    if not isinstance(doc, Mapping):
        raise SchemaError("modifier must be an object")
    shape = doc.get("shape")
    if shape not in _MODIFIER_FIELDS:
        raise SchemaError(f"unknown modifier shape: {shape!r}")
    fields = _MODIFIER_FIELDS[shape]
    _check_keys(doc, {"shape"} | fields["required"] | fields["optional"], "modifier")
    missing = fields["required"] - set(doc)
    if missing:
        raise SchemaError(f"modifier missing field(s): {sorted(missing)}")
    out: Dict[str, Any] = {"shape": shape}
    if shape == "gaussian":
        out["mu"] = _require_number(doc, "mu")
        out["sigma"] = _require_number(doc, "sigma")
        if out["sigma"] <= 0:
            raise SchemaError("modifier sigma must be positive")
    elif shape == "threshold":
        out["t"] = _require_number(doc, "t")
        if out["t"] <= 0:
            raise SchemaError("modifier t must be positive")
        ascending = doc.get("ascending", True)
        if not isinstance(ascending, bool):
            raise SchemaError("modifier ascending must be a boolean")
        out["ascending"] = ascending
    return out


def _validate_term(doc: Any) -> Dict[str, Any]:
    if not isinstance(doc, Mapping):
        raise SchemaError("mpo term must be an object")
    _check_keys(doc, {"property", "modifier", "target"}, "term")
    selector = _require_str(doc, "property")
    if selector not in MPO_SELECTORS:
        raise SchemaError(f"unknown term property: {selector!r}")
    if "modifier" not in doc:
        raise SchemaError(f"term {selector!r} missing a modifier")
    out = {"property": selector, "modifier": _validate_modifier(doc["modifier"])}
    if selector == "similarity":
        out["target"] = _check_target(doc, "target")
    elif "target" in doc:
        raise SchemaError(f"term {selector!r} does not take a target")
    return out


def load_task(source: Union[str, Path, Mapping[str, Any]]) -> TaskSpec:
    """Validate a config document (or a path to one) into a TaskSpec."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, Mapping):
        raise SchemaError("task config must be a JSON object")

    name = _require_str(doc, "name")
    kind_text = _require_str(doc, "kind")
    try:
        kind = TaskKind(kind_text)
    except ValueError:
        raise SchemaError(f"unknown task kind: {kind_text!r}") from None
    if kind not in _KIND_FIELDS:
        raise SchemaError(f"task kind {kind_text!r} is not config-constructible")

    fields = _KIND_FIELDS[kind]
    _check_keys(
        doc, {"name", "kind"} | fields["required"] | fields["optional"], "config"
    )
    missing = fields["required"] - set(doc)
    if missing:
        raise SchemaError(f"{kind_text} config missing field(s): {sorted(missing)}")

    params: Dict[str, Any] = {}
    if kind is TaskKind.REDISCOVERY:
        params["target"] = _check_target(doc, "target")
    elif kind is TaskKind.SIMILARITY:
        params["target"] = _check_target(doc, "target")
        if "modifier" in doc:
            params["modifier"] = _validate_modifier(doc["modifier"])
    elif kind is TaskKind.ISOMER:
        text = _require_str(doc, "formula")
        parse_formula(text)  # raises MalformedFormula
        params["formula"] = text
    elif kind is TaskKind.MEDIAN:
        params["target"] = _check_target(doc, "target")
        params["target2"] = _check_target(doc, "target2")
    else:
        terms = doc.get("terms")
        if not isinstance(terms, list) or not terms:
            raise SchemaError("mpo terms must be a non-empty list")
        params["terms"] = [_validate_term(t) for t in terms]
        aggregation = doc.get("aggregation", "geometric")
        if aggregation not in AGGREGATIONS:
            raise SchemaError(f"unknown aggregation: {aggregation!r}")
        params["aggregation"] = aggregation

    return TaskSpec(name=name, kind=kind, parameters=params)


def _build_modifier(doc: Mapping[str, Any]) -> Callable[[float], float]:
    shape = doc["shape"]
    if shape == "gaussian":
        mu, sigma = doc["mu"], doc["sigma"]
        return lambda x: gaussian_modifier(x, mu, sigma)
    if shape == "threshold":
        t, ascending = doc["t"], doc["ascending"]
        return lambda x: threshold_modifier(x, t, ascending=ascending)
    return lambda x: x


def build_oracle(spec: TaskSpec) -> Oracle:
    params = spec.parameters
    if spec.kind is TaskKind.REDISCOVERY:
        return rediscovery_task(params["target"], name=spec.name)
    if spec.kind is TaskKind.SIMILARITY:
        modifier = (
            _build_modifier(params["modifier"]) if "modifier" in params else None
        )
        return similarity_task(params["target"], modifier=modifier, name=spec.name)
    if spec.kind is TaskKind.ISOMER:
        return isomer_task(params["formula"], name=spec.name)
    if spec.kind is TaskKind.MEDIAN:
        return median_task(params["target"], params["target2"], name=spec.name)
    if spec.kind is TaskKind.MPO:
        terms = [
            MpoTerm(
                selector=t["property"],
                modifier=_build_modifier(t["modifier"]),
                target=t.get("target"),
            )
            for t in params["terms"]
        ]
        return mpo_task(terms, aggregation=params["aggregation"], name=spec.name)
    raise SchemaError(f"cannot build an oracle for kind {spec.kind!r} from config")


def load_oracle(source: Union[str, Path, Mapping[str, Any]]) -> Oracle:
    return build_oracle(load_task(source))


def task_pack_names() -> List[str]:
    root = resources.files("moldpo.tasks") / "pack"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_pack_task(name: str) -> Oracle:
    path = resources.files("moldpo.tasks") / "pack" / f"{name}.json"
    if not path.is_file():
        raise SchemaError(f"no packaged task named {name!r}")
    return load_oracle(json.loads(path.read_text(encoding="utf-8")))
