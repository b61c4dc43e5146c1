"""Distribution spec files: one JSON document with a `kind` field.

    {"kind": "constant", "b": 5}
    {"kind": "table", "entries": [[3, 0.5], [4, 0.5]]}
    {"kind": "geometric", "r": 2, "q": 0.5}
    {"kind": "eta", "r": 3, "b": 12}
    {"kind": "poisson", "r": 2, "rate": 5}
    {"kind": "powerlaw", "r": 2, "beta": 2.5, "kmax": 100000}

Field names are part of the CLI contract.  An optional "name" field is
carried through for table headers.
"""

import json
from pathlib import Path

from .errors import ValidationError
from .offspring import (OffspringDistribution, make_constant, make_eta,
                        make_geometric, make_poisson, make_powerlaw, make_table)

__all__ = ["parse_dist_spec", "load_dist_spec"]

_REQUIRED = {
    "constant": {"b"},
    "table": {"entries"},
    "geometric": {"r", "q"},
    "eta": {"r", "b"},
    "poisson": {"r", "rate"},
    "powerlaw": {"r", "beta"},
}
_OPTIONAL = {
    "powerlaw": {"kmax"},
}


def parse_dist_spec(doc: dict) -> OffspringDistribution:
    if not isinstance(doc, dict):
        raise ValidationError("distribution spec must be a JSON object")
    kind = doc.get("kind")
    if kind not in _REQUIRED:
        raise ValidationError(
            f"unknown kind {kind!r}; expected one of {sorted(_REQUIRED)}")
    fields = set(doc) - {"kind", "name"}
    required = _REQUIRED[kind]
    optional = _OPTIONAL.get(kind, set())
    missing = required - fields
    if missing:
        raise ValidationError(f"kind {kind!r} is missing fields {sorted(missing)}")
    unknown = fields - required - optional
    if unknown:
        raise ValidationError(f"kind {kind!r} does not accept fields {sorted(unknown)}")
    if kind == "constant":
        return make_constant(_as_int(doc["b"], "b"))
    if kind == "table":
        entries = doc["entries"]
        if not isinstance(entries, list):
            raise ValidationError("'entries' must be a list of [k, prob] pairs")
        return make_table([tuple(e) for e in entries])
    if kind == "geometric":
        return make_geometric(_as_int(doc["r"], "r"), float(doc["q"]))
    if kind == "eta":
        return make_eta(_as_int(doc["r"], "r"), float(doc["b"]))[0]
    if kind == "poisson":
        return make_poisson(_as_int(doc["r"], "r"), float(doc["rate"]))
    return make_powerlaw(_as_int(doc["r"], "r"), float(doc["beta"]),
                         int(doc.get("kmax", 100_000)))


def load_dist_spec(path) -> OffspringDistribution:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"distribution spec {path}: invalid JSON ({exc})") from exc
    return parse_dist_spec(doc)


def _as_int(v, name):
    if isinstance(v, bool) or int(v) != v:
        raise ValidationError(f"field {name!r} must be an integer, got {v!r}")
    return int(v)
