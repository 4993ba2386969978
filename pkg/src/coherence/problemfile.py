"""Reading, validating and writing problem files (a JSON dialect).

A problem either names outcomes and events::

    {"atoms": ["wr", "w", "r", "neither"],
     "events": [{"name": "warm", "atoms": ["wr", "w"]}, ...],
     "credences": [0.5, ...], "weights": [1, ...]}

or gives the event matrix directly (``"V": [[1, 0], ...]``, columns are
outcomes, optionally labelled by ``"atoms"``). Aggregation problems list
``"experts"`` of the same shape, probe problems add ``"probe": {"values":
...}``. Numbers are written with 17 significant digits so a dump/parse/dump
cycle is byte-identical.
"""
from __future__ import annotations

import json
import math
import re

import jsonschema
import numpy as np

from .credence import build_base, from_matrix
from .errors import ValidationError

KEY_ORDER = ("name", "atoms", "events", "V", "credences", "weights", "experts", "queries", "probe", "values")

_prob = {"type": "number", "minimum": 0, "maximum": 1}
_event = {
    "type": "object",
    "required": ["name", "atoms"],
    "properties": {"name": {"type": "string"}, "atoms": {"type": "array", "items": {"type": "string"}}},
    "additionalProperties": False,
}
_base_props = {
    "name": {"type": "string"},
    "atoms": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    "events": {"type": "array", "items": _event, "minItems": 1},
    "V": {"type": "array", "minItems": 1,
          "items": {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}}},
    "credences": {"type": "array", "items": _prob},
    "weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
}
_one_form = [{"required": ["events", "credences"], "not": {"required": ["V"]}},
             {"required": ["V", "credences"], "not": {"required": ["events"]}}]

SCHEMA = {
    "type": "object",
    "properties": {
        **_base_props,
        "experts": {"type": "array", "minItems": 1, "items": {
            "type": "object", "properties": _base_props, "additionalProperties": False, "oneOf": _one_form}},
        "queries": {"type": "array", "items": _event},
        "probe": {"type": "object", "required": ["values"], "additionalProperties": False,
                  "properties": {"values": {"type": "array", "items": {
                      "type": "array", "items": {"type": "array", "items": _prob}}}}},
    },
    "additionalProperties": False,
    "anyOf": [{"required": ["events"]}, {"required": ["V"]}, {"required": ["experts"]}],
    "not": {"required": ["events", "V"]},
    "dependencies": {
        "credences": {"anyOf": [{"required": ["events"]}, {"required": ["V"]}]},
        "probe": {"anyOf": [{"required": ["events"]}, {"required": ["V"]}]},
        "weights": ["credences"],
    },
}


class ProblemError(ValidationError):
    """Validation failure pointing at a location in the file."""

    def __init__(self, message, path=(), line=None):
        super().__init__(message)
        self.path = tuple(path)
        self.line = line


# --- locating values in the source text ---------------------------------

_TOKEN = re.compile(r'\s*(?:(?P<open>[\[{])|(?P<close>[\]}])|(?P<comma>,)|(?P<colon>:)'
                    r'|(?P<str>"(?:[^"\\]|\\.)*")|(?P<lit>[^\s,:\[\]{}]+))', re.S)


def value_lines(text):
    """Map every JSON path (tuple of keys/indices) to the line its value starts on."""
    lines = {}
    stack = []  # entries: [container_type, key_or_index, expecting_key]
    pos = 0
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def line_of(offset):
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1

    def here():
        return tuple(f[1] for f in stack if f[1] is not None)

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        kind = m.lastgroup
        start = m.start(kind)
        top = stack[-1] if stack else None
        if kind == "str" and top and top[0] == "obj" and top[2]:
            top[1] = json.loads(m.group("str"))
            top[2] = False
            continue
        if kind in ("open", "str", "lit"):
            if top and top[0] == "arr" and top[1] is None:
                top[1] = 0
            lines.setdefault(here(), line_of(start))
            if kind == "open":
                stack.append(["obj" if m.group("open") == "{" else "arr", None, m.group("open") == "{"])
        elif kind == "close":
            stack.pop()
        elif kind == "comma" and top:
            if top[0] == "arr":
                top[1] += 1
            else:
                top[2] = True
    return lines


def _line_for(lines, path):
    path = tuple(path)
    while path not in lines and path:
        path = path[:-1]
    return lines.get(path, 1)


# --- parsing -------------------------------------------------------------

def parse(text):
    """Parse and schema-validate problem text. Raises :class:`ProblemError`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        lines = value_lines(text)
        path = tuple(err.absolute_path)
        where = "/".join(str(p) for p in path) or "<root>"
        raise ProblemError(f"{where}: {err.message}", path, _line_for(lines, path))
    _check_shapes(data, text)
    return data


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def _fail(text, path, message):
    lines = value_lines(text)
    raise ProblemError(message, path, _line_for(lines, path))


def _check_base_shapes(d, text, prefix):
    n = len(d["events"]) if "events" in d else len(d["V"])
    for key in ("credences", "weights"):
        if key in d and len(d[key]) != n:
            _fail(text, prefix + (key,), f"{key}: expected {n} entries, got {len(d[key])}")
    if "V" in d:
        widths = {len(r) for r in d["V"]}
        if len(widths) != 1:
            _fail(text, prefix + ("V",), "V: rows must have equal length")
        if "atoms" in d and len(d["atoms"]) != widths.pop():
            _fail(text, prefix + ("atoms",), "atoms: one label per column of V is required")
    if "events" in d and "atoms" in d:
        known = set(d["atoms"])
        for i, ev in enumerate(d["events"]):
            for j, o in enumerate(ev["atoms"]):
                if o not in known:
                    _fail(text, prefix + ("events", i, "atoms", j), f"unknown outcome label {o!r}")


def _check_shapes(data, text):
    if "events" in data or "V" in data:
        _check_base_shapes(data, text, ())
    for i, e in enumerate(data.get("experts", [])):
        _check_base_shapes(e, text, ("experts", i))
    if "probe" in data:
        n = len(data["events"]) if "events" in data else len(data.get("V", []))
        for i, probe in enumerate(data["probe"]["values"]):
            if len(probe) != n:
                _fail(text, ("probe", "values", i), f"probe {i}: expected {n} event rows")
            if len({len(r) for r in probe}) > 1:
                _fail(text, ("probe", "values", i), f"probe {i}: rephrasing counts differ")


def to_base(d, clamp=None):
    """Credence base described by a (sub-)problem dict."""
    q = np.asarray(d["credences"], dtype=float)
    if clamp is not None:
        q = np.clip(q, clamp, 1.0 - clamp)
    w = d.get("weights")
    if "V" in d:
        names = [f"E{i + 1}" for i in range(len(d["V"]))]
        return from_matrix(d["V"], q, w, names=names, labels=d.get("atoms"))
    events = [(e["name"], e["atoms"]) for e in d["events"]]
    return build_base(events, q, w, outcomes=d.get("atoms"))


def event_matrix(d):
    """The raw outcome-level 0/1 matrix and outcome labels of a problem."""
    if "V" in d:
        V = np.asarray(d["V"], dtype=float)
        return V, d.get("atoms") or [f"w{j + 1}" for j in range(V.shape[1])]
    outcomes = list(d.get("atoms") or dict.fromkeys(o for e in d["events"] for o in e["atoms"]))
    pos = {o: j for j, o in enumerate(outcomes)}
    V = np.zeros((len(d["events"]), len(outcomes)))
    for i, e in enumerate(d["events"]):
        V[i, [pos[o] for o in e["atoms"]]] = 1.0
    return V, outcomes


# --- writing -------------------------------------------------------------

def format_number(x):
    """17 significant digits; integers stay integers, non-finite values become strings."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x + 0.0, ".17g")


def _is_scalar(v):
    return v is None or isinstance(v, (str, bool, int, float, np.integer, np.floating))


def _scalar(v):
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    return format_number(v)


def _ordered(d):
    known = [k for k in KEY_ORDER if k in d]
    return known + [k for k in d if k not in KEY_ORDER]


def _flat(v):
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return all(_is_scalar(x) for x in v)
    if isinstance(v, dict):
        return all(_is_scalar(x) or (isinstance(x, (list, tuple, np.ndarray)) and _flat(x)) for x in v.values())
    return True


def _dump(v, indent):
    pad = "  " * indent
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if _is_scalar(v):
        return _scalar(v)
    if isinstance(v, (list, tuple)):
        if _flat(v):
            return "[" + ", ".join(_scalar(x) for x in v) + "]"
        inner = ",\n".join(pad + "  " + _dump(x, indent + 1) for x in v)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(v, dict):
        keys = _ordered(v)
        if indent > 0 and _flat(v):
            return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v[k], indent + 1)}" for k in keys) + "}"
        inner = ",\n".join(f"{pad}  {json.dumps(k)}: {_dump(v[k], indent + 1)}" for k in keys)
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj):
    """Canonical text for a problem or a result object (trailing newline included)."""
    return _dump(obj, 0) + "\n"


__all__ = ["SCHEMA", "ProblemError", "parse", "load", "to_base", "event_matrix", "dumps", "format_number",
           "value_lines"]
