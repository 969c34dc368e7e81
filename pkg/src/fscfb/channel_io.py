"""Versioned channel file format.

JSON with fields ``x_size``, ``y_size``, ``s_size``, then either ``w`` +
``f`` (unifilar, both nested [s'][x][y]) or ``law`` (general,
[s'][x][y][s]). Probabilities may be JSON numbers or exact fraction
strings like "1/4"; an optional ``s0``, a free-form ``label``/``params``
pair, and an ``optimizer`` settings block are carried through.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channels import FiniteStateChannel, UnifilarChannel
from .errors import ValidationError
from .gallery import GalleryChannel
from .rational import as_fraction

FORMAT_NAME = "fsc-channel"
FORMAT_VERSION = 1

OPTIMIZER_KEYS = ("restarts", "max_iters", "tol", "seed")


@dataclass
class LoadedChannel:
    kind: str                       # "unifilar" | "general"
    channel: object                 # UnifilarChannel or FiniteStateChannel
    s0: int | None = None
    label: str | None = None
    params: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)
    exact_w: tuple | None = None    # present when every probability was exact

    def as_general(self) -> FiniteStateChannel:
        from .channels import compose_unifilar

        if self.kind == "general":
            return self.channel
        return compose_unifilar(self.channel)


def _parse_prob_table(node, path: str):
    """Return (floats, exacts, all_exact) for a nested probability table."""
    if isinstance(node, list):
        floats, exacts, all_exact = [], [], True
        for i, sub in enumerate(node):
            f, e, ok = _parse_prob_table(sub, f"{path}[{i}]")
            floats.append(f)
            exacts.append(e)
            all_exact = all_exact and ok
        return floats, exacts, all_exact
    if isinstance(node, str):
        frac = as_fraction(node)
        return float(frac), frac, True
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(f"probability at {path} must be a number or 'p/q' string")
    if isinstance(node, int):
        return float(node), Fraction(node), True
    return float(node), Fraction(node), False


def load_channel(path) -> LoadedChannel:
    text = Path(path).read_text()
    return loads_channel(text)


def loads_channel(text: str) -> LoadedChannel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"channel file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("channel file must hold a JSON object")
    if data.get("format") != FORMAT_NAME:
        raise ValidationError(f"unknown file format {data.get('format')!r}")
    if data.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported format version {data.get('version')!r}")
    sizes = {}
    for key in ("x_size", "y_size", "s_size"):
        if not isinstance(data.get(key), int) or data[key] < 1:
            raise ValidationError(f"{key} must be a positive integer")
        sizes[key] = data[key]

    s0 = data.get("s0")
    if s0 is not None:
        if not isinstance(s0, int) or not 0 <= s0 < sizes["s_size"]:
            raise ValidationError(f"s0 = {s0!r} outside 0..{sizes['s_size'] - 1}")

    optimizer = {}
    block = data.get("optimizer", {})
    if block:
        if not isinstance(block, dict):
            raise ValidationError("optimizer block must be an object")
        unknown = set(block) - set(OPTIMIZER_KEYS)
        if unknown:
            raise ValidationError(f"unknown optimizer settings: {sorted(unknown)}")
        optimizer = dict(block)

    label = data.get("label")
    params = data.get("params", {}) or {}

    if "law" in data:
        floats, _, _ = _parse_prob_table(data["law"], "law")
        law = np.array(floats, dtype=float)
        want = (sizes["s_size"], sizes["x_size"], sizes["y_size"], sizes["s_size"])
        if law.shape != want:
            raise ValidationError(f"law has shape {law.shape}, expected {want}")
        channel = FiniteStateChannel(law)
        return LoadedChannel("general", channel, s0, label, params, optimizer)

    if "w" not in data or "f" not in data:
        raise ValidationError("channel file needs either 'law' or both 'w' and 'f'")
    floats, exacts, all_exact = _parse_prob_table(data["w"], "w")
    w = np.array(floats, dtype=float)
    want = (sizes["s_size"], sizes["x_size"], sizes["y_size"])
    if w.shape != want:
        raise ValidationError(f"w has shape {w.shape}, expected {want}")
    f = np.array(data["f"])
    if f.dtype.kind not in "iuf":
        raise ValidationError("f must contain integer state indices")
    if f.shape != want:
        raise ValidationError(f"f has shape {f.shape}, expected {want}")
    channel = UnifilarChannel(w, f)
    exact_w = _tupled(exacts) if all_exact else None
    return LoadedChannel("unifilar", channel, s0, label, params, optimizer, exact_w)


def _tupled(nested):
    if isinstance(nested, list):
        return tuple(_tupled(v) for v in nested)
    return nested


def _prob_out(value):
    if isinstance(value, Fraction):
        return str(value)
    return float(f"{float(value):.12g}")


def _table_out(node):
    if isinstance(node, (list, tuple)):
        return [_table_out(v) for v in node]
    return _prob_out(node)


def _params_out(params: dict):
    out = {}
    for key, value in params.items():
        out[key] = str(value) if isinstance(value, Fraction) else value
    return out


def dumps_channel(obj, s0: int | None = None, optimizer: dict | None = None) -> str:
    """Serialize a channel deterministically; fraction inputs echo as fractions."""
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if isinstance(obj, GalleryChannel):
        doc["label"] = obj.label
        doc["params"] = _params_out(obj.params)
        doc["kind"] = "unifilar"
        doc["x_size"], doc["y_size"], doc["s_size"] = obj.x_size, obj.y_size, obj.s_size
        if s0 is not None:
            doc["s0"] = int(s0)
        doc["w"] = _table_out(obj.exact_w)
        doc["f"] = np.asarray(obj.channel.f).tolist()
    elif isinstance(obj, LoadedChannel):
        if obj.label is not None:
            doc["label"] = obj.label
        if obj.params:
            doc["params"] = _params_out(obj.params)
        doc["kind"] = obj.kind
        ch = obj.channel
        doc["x_size"], doc["y_size"], doc["s_size"] = ch.x_size, ch.y_size, ch.s_size
        use_s0 = s0 if s0 is not None else obj.s0
        if use_s0 is not None:
            doc["s0"] = int(use_s0)
        if obj.kind == "unifilar":
            doc["w"] = _table_out(obj.exact_w if obj.exact_w else ch.w.tolist())
            doc["f"] = np.asarray(ch.f).tolist()
        else:
            doc["law"] = _table_out(ch.law.tolist())
    elif isinstance(obj, UnifilarChannel):
        doc["kind"] = "unifilar"
        doc["x_size"], doc["y_size"], doc["s_size"] = obj.x_size, obj.y_size, obj.s_size
        if s0 is not None:
            doc["s0"] = int(s0)
        doc["w"] = _table_out(obj.w.tolist())
        doc["f"] = np.asarray(obj.f).tolist()
    elif isinstance(obj, FiniteStateChannel):
        doc["kind"] = "general"
        doc["x_size"], doc["y_size"], doc["s_size"] = obj.x_size, obj.y_size, obj.s_size
        if s0 is not None:
            doc["s0"] = int(s0)
        doc["law"] = _table_out(obj.law.tolist())
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    if optimizer:
        unknown = set(optimizer) - set(OPTIMIZER_KEYS)
        if unknown:
            raise ValidationError(f"unknown optimizer settings: {sorted(unknown)}")
        doc["optimizer"] = optimizer
    return _pretty(doc) + "\n"


def _pretty(value, pad: str = "") -> str:
    """JSON with leaf rows kept on one line; key order is insertion order."""
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = pad + "  "
        body = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {_pretty(v, inner)}" for k, v in value.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, list):
        if not any(isinstance(v, (dict, list)) for v in value):
            return json.dumps(value)
        inner = pad + "  "
        body = ",\n".join(f"{inner}{_pretty(v, inner)}" for v in value)
        return "[\n" + body + "\n" + pad + "]"
    return json.dumps(value)


def save_channel(obj, path, s0: int | None = None, optimizer: dict | None = None) -> None:
    Path(path).write_text(dumps_channel(obj, s0=s0, optimizer=optimizer))
