"""File formats: binary complex fields with a JSON sidecar, and JSON records
for traces and cylinders."""
import json
from pathlib import Path

import numpy as np


def _sidecar(path):
    return Path(str(path) + ".json")


def write_field(path, values, **header):
    """Row-major float64 (re, im) pairs in ``path``; geometry in ``path.json``."""
    values = np.ascontiguousarray(np.asarray(values, dtype=np.complex128))
    pairs = np.stack([values.real, values.imag], axis=-1).astype("<f8")
    Path(path).write_bytes(pairs.tobytes(order="C"))
    head = {"shape": list(values.shape), "dtype": "float64", "layout": "row-major re,im pairs"}
    head.update({k: _jsonable(v) for k, v in header.items()})
    _sidecar(path).write_text(json.dumps(head, indent=1))
    return path, _sidecar(path)


def read_field(path):
    head = json.loads(_sidecar(path).read_text())
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f8")
    pairs = raw.reshape(tuple(head["shape"]) + (2,))
    return pairs[..., 0] + 1j * pairs[..., 1], head


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def trace_record(trace):
    return {
        "terminal": trace.terminal,
        "total_length": trace.total_length,
        "cone_point": trace.cone_point,
        "end": {"polygon": trace.end.polygon, "xy": list(trace.end.xy)},
        "segments": [{"polygon": s.polygon, "start": _jsonable(s.start),
                      "end": _jsonable(s.end), "offset": _jsonable(s.offset)}
                     for s in trace.segments],
    }


def cylinder_record(cyl):
    return {
        "direction": list(cyl.direction),
        "length": cyl.length,
        "width": cyl.width,
        "core_basepoint": {"polygon": cyl.core_basepoint.polygon,
                           "xy": list(cyl.core_basepoint.xy)},
        "boundary_saddles": list(cyl.boundary_saddles),
    }
