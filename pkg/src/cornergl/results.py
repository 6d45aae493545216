"""Result documents: canonical JSON, check ledgers, CSV projections.

Every run writes a schema-versioned document whose deterministic part
(everything except wall-clock timing) serializes to identical bytes for
identical config, seed, and artifact version.  Values that JSON cannot
represent are mapped on the way out: complex numbers to re/im pairs,
non-finite floats to the strings "nan", "inf", "-inf"; round-tripping a
parsed document therefore reproduces the file exactly.
"""

import dataclasses
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SCHEMA_VERSION = "cornergl/1"


@dataclass
class CheckEntry:
    name: str
    status: str                   # "pass" | "fail" | "inconclusive"
    measured: object = None
    tolerance: object = None
    detail: str = ""


def check(name, ok, measured=None, tolerance=None, detail="",
          inconclusive=False):
    status = "inconclusive" if inconclusive else ("pass" if ok else "fail")
    return CheckEntry(name=name, status=status, measured=measured,
                      tolerance=tolerance, detail=detail)


def exit_code(checks):
    """0 when every ledger entry passes, else 2."""
    return 0 if all(c.status == "pass" for c in checks) else 2


def _plain(obj):
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        if obj != obj:
            return "nan"
        if obj == float("inf"):
            return "inf"
        if obj == float("-inf"):
            return "-inf"
        return obj
    if isinstance(obj, complex):
        return {"im": _plain(obj.imag), "re": _plain(obj.real)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _plain(float(obj))
    if isinstance(obj, np.complexfloating):
        return _plain(complex(obj))
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, set):
        return sorted(_plain(v) for v in obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=1,
                      allow_nan=False) + "\n"


def content_hash(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cornergl-",
                               suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def make_document(command, config, results, raw=None, checks=(), timing=None,
                  version="0"):
    config = _plain(config)
    return {
        "document": {
            "checks": [_plain(c) for c in checks],
            "command": command,
            "config": config,
            "config_hash": content_hash(config),
            "raw": _plain(raw or {}),
            "results": _plain(results),
            "schema": SCHEMA_VERSION,
            "version": version,
        },
        "timing": _plain(timing or {}),
    }


def write_document(path, doc):
    atomic_write_text(path, canonical_json(doc))


def read_document(path):
    with open(path) as handle:
        doc = json.load(handle)
    if "document" not in doc:
        raise ParameterError(f"{path} is not a result document")
    return doc


def ensure_schema(doc, path="document"):
    found = doc.get("document", {}).get("schema")
    if found != SCHEMA_VERSION:
        raise ParameterError(
            f"schema version mismatch in {path}: found {found!r}, "
            f"this build reads {SCHEMA_VERSION!r}; migrate the document")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if value != value:
            return "nan"
        return repr(value)
    if isinstance(value, (np.floating, np.integer)):
        return _cell(value.item())
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
