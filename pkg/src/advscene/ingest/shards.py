"""Length-prefixed binary shards of ModelSamples plus a JSON sidecar.

Byte layout per record (all little-endian, documented in
``docs/file_formats.md``)::

    uint32  payload byte length (exclusive of this prefix)
    uint32  n_agents N
    uint32  t_hist
    uint32  t_future
    uint8   flipped
    uint8   direction
    float64 dt, origin_x, origin_y
    int64   agent_ids[N]
    uint8   roles[N]
    float64 dims[N, 2]
    float64 bounds[N, 2]
    float64 history[N, t_hist, 4]
    float64 init[N, 4]
    float64 future_states[t_future, N, 4]
    float64 actions[t_future, N, 2]

The sidecar ``<shard>.json`` records the format tag, record count, and the
horizon constants so readers can validate before decoding.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Iterator, List

import numpy as np

from advscene.errors import SchemaError
from advscene.ingest.windows import ModelSample

FORMAT_TAG = "advscene-samples-v1"
_HEAD = struct.Struct("<IIIBB")
_FLOATS = struct.Struct("<ddd")


def _encode(sample: ModelSample) -> bytes:
    n = sample.n_agents
    t_hist = sample.history.shape[1]
    t_future = sample.actions.shape[0]
    parts = [
        _HEAD.pack(n, t_hist, t_future, int(sample.flipped), sample.direction),
        _FLOATS.pack(sample.dt, sample.origin[0], sample.origin[1]),
        np.ascontiguousarray(sample.agent_ids, dtype="<i8").tobytes(),
        np.ascontiguousarray(sample.roles, dtype=np.uint8).tobytes(),
        np.ascontiguousarray(sample.dims, dtype="<f8").tobytes(),
        np.ascontiguousarray(sample.bounds, dtype="<f8").tobytes(),
        np.ascontiguousarray(sample.history, dtype="<f8").tobytes(),
        np.ascontiguousarray(sample.init, dtype="<f8").tobytes(),
        np.ascontiguousarray(sample.future_states, dtype="<f8").tobytes(),
        np.ascontiguousarray(sample.actions, dtype="<f8").tobytes(),
    ]
    return b"".join(parts)


def _decode(payload: bytes) -> ModelSample:
    n, t_hist, t_future, flipped, direction = _HEAD.unpack_from(payload, 0)
    off = _HEAD.size
    dt, ox, oy = _FLOATS.unpack_from(payload, off)
    off += _FLOATS.size

    def take(dtype, shape):
        nonlocal off
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=off).reshape(shape)
        off += arr.nbytes
        return arr.astype(arr.dtype.newbyteorder("=")).copy() if arr.dtype.byteorder == "<" else arr.copy()

    agent_ids = take("<i8", (n,))
    roles = take(np.uint8, (n,))
    dims = take("<f8", (n, 2))
    bounds = take("<f8", (n, 2))
    history = take("<f8", (n, t_hist, 4))
    init = take("<f8", (n, 4))
    future = take("<f8", (t_future, n, 4))
    actions = take("<f8", (t_future, n, 2))
    return ModelSample(
        agent_ids=agent_ids.astype(np.int64),
        roles=roles,
        dims=dims,
        bounds=bounds,
        history=history,
        init=init,
        future_states=future,
        actions=actions,
        dt=dt,
        origin=(ox, oy),
        flipped=bool(flipped),
        direction=int(direction),
    )


def write_shard(samples: Iterable[ModelSample], path: str | Path) -> int:
    """Write samples to ``path`` and the sidecar to ``path + '.json'``."""
    path = Path(path)
    count = 0
    t_hist = t_future = None
    with path.open("wb") as fh:
        for sample in samples:
            payload = _encode(sample)
            fh.write(struct.pack("<I", len(payload)))
            fh.write(payload)
            t_hist = sample.history.shape[1]
            t_future = sample.actions.shape[0]
            count += 1
    sidecar = {
        "format": FORMAT_TAG,
        "count": count,
        "t_hist": t_hist,
        "t_future": t_future,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True, indent=1) + "\n")
    return count


def read_shard(path: str | Path) -> Iterator[ModelSample]:
    path = Path(path)
    sidecar_path = Path(str(path) + ".json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
        if sidecar.get("format") != FORMAT_TAG:
            raise SchemaError(f"{sidecar_path.name}: unknown format {sidecar.get('format')!r}")
    with path.open("rb") as fh:
        while True:
            prefix = fh.read(4)
            if not prefix:
                return
            if len(prefix) < 4:
                raise SchemaError(f"{path.name}: truncated length prefix")
            (length,) = struct.unpack("<I", prefix)
            payload = fh.read(length)
            if len(payload) < length:
                raise SchemaError(f"{path.name}: truncated record")
            yield _decode(payload)


def load_shards(paths: Iterable[str | Path]) -> List[ModelSample]:
    out: List[ModelSample] = []
    for p in paths:
        out.extend(read_shard(p))
    return out
