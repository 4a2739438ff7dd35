from advscene.ingest.highd import Recording, Track, parse_recording
from advscene.ingest.shards import load_shards, read_shard, write_shard
from advscene.ingest.windows import (
    N_MAX,
    T_FUTURE,
    T_HIST,
    ModelSample,
    ScenarioWindow,
    extract_windows,
    normalize_window,
    reflect_window,
    window_from_positions,
)

__all__ = [
    "ModelSample",
    "N_MAX",
    "Recording",
    "ScenarioWindow",
    "T_FUTURE",
    "T_HIST",
    "Track",
    "extract_windows",
    "load_shards",
    "normalize_window",
    "parse_recording",
    "read_shard",
    "reflect_window",
    "window_from_positions",
    "write_shard",
]
