"""Reading, filtering and generating (fid, id, class) relations."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigurationError, ConsistencyError, ParseError
from .feed import Interner, VideoRelation, members

Source = Union[bytes, str, IO[bytes], IO[str]]


def _lines(source: Source) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def _csv_rows(source: Source) -> Iterator[Tuple[int, str, str, str]]:
    reader = csv.reader(_lines(source))
    header = next(reader, None)
    if header is None:
        return
    if [h.strip() for h in header] != ["fid", "id", "class"]:
        raise ParseError(f"expected header 'fid,id,class', got {','.join(header)!r}", 1)
    for row in reader:
        n = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", n)
        yield n, row[0].strip(), row[1].strip(), row[2].strip()


def _jsonl_rows(source: Source) -> Iterator[Tuple[int, object, object, object]]:
    for n, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", n, e.pos) from None
        if not isinstance(obj, dict) or not {"fid", "id", "class"} <= obj.keys():
            raise ParseError("expected an object with keys fid, id, class", n)
        yield n, obj["fid"], obj["id"], obj["class"]


def parse_vr(source: Source, format: str = "csv") -> VideoRelation:
    """Parse a relation from CSV (header ``fid,id,class``) or JSONL.

    Frame ids missing between 0 and the largest one become empty frames.
    Raises :class:`ParseError` for malformed rows and
    :class:`ConsistencyError` for a repeated (fid, id) pair or an id seen
    with two classes; both carry the offending line number.
    """
    if format == "csv":
        rows: Iterable = _csv_rows(source)
    elif format == "jsonl":
        rows = _jsonl_rows(source)
    else:
        raise ConfigurationError(f"unknown relation format {format!r}")

    interner = Interner()
    class_of: Dict[int, str] = {}
    frames: Dict[int, int] = {}
    for n, fid, oid, cls in rows:
        try:
            fid = int(fid)
        except (TypeError, ValueError):
            raise ParseError(f"frame id {fid!r} is not an integer", n) from None
        if fid < 0:
            raise ParseError(f"frame id {fid} is negative", n)
        if isinstance(oid, bool) or not isinstance(oid, (str, int)) or str(oid) == "":
            raise ParseError(f"bad object id {oid!r}", n)
        if not isinstance(cls, str) or cls == "":
            raise ParseError(f"bad class label {cls!r}", n)
        k = interner.intern(str(oid))
        if class_of.setdefault(k, cls) != cls:
            raise ConsistencyError(
                f"line {n}: object {oid} has class {cls!r} but was {class_of[k]!r} before"
            )
        mask = frames.get(fid, 0)
        if mask >> k & 1:
            raise ConsistencyError(f"line {n}: duplicate record for object {oid} in frame {fid}")
        frames[fid] = mask | 1 << k
    n_frames = max(frames) + 1 if frames else 0
    return VideoRelation(tuple(frames.get(f, 0) for f in range(n_frames)), class_of, interner)


def read_vr(path: Union[str, Path], format: Optional[str] = None) -> VideoRelation:
    path = Path(path)
    fmt = format or ("jsonl" if path.suffix in (".jsonl", ".json") else "csv")
    with path.open("rb") as fh:
        return parse_vr(fh, fmt)


def write_vr(relation: VideoRelation, out: IO[str], format: str = "csv") -> None:
    if format == "csv":
        out.write("fid,id,class\n")
        for r in relation.records():
            out.write(f"{r.fid},{r.id},{r.cls}\n")
    elif format == "jsonl":
        for r in relation.records():
            out.write(json.dumps({"fid": r.fid, "id": r.id, "class": r.cls}) + "\n")
    else:
        raise ConfigurationError(f"unknown relation format {format!r}")


def filter_classes(relation: VideoRelation, wanted: Iterable[str]) -> VideoRelation:
    """Drop every record whose class is not in ``wanted``; frame count is kept."""
    wanted = set(wanted)
    keep = {k: c for k, c in relation.class_of.items() if c in wanted}
    mask = 0
    for k in keep:
        mask |= 1 << k
    return VideoRelation(tuple(f & mask for f in relation.frames), keep, relation.ids)


DEFAULT_LABELS = ("car", "person", "truck", "bus")


@dataclass(frozen=True)
class FeedConfig:
    n_frames: int = 1000
    mean_objects_per_frame: float = 7.0
    mean_frames_per_object: float = 50.0
    n_classes: int = 1
    class_weights: Tuple[float, ...] = (1.0,)
    occlusion: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_frames < 1 or self.n_classes < 1:
            raise ConfigurationError("n_frames and n_classes must be >= 1")
        if self.mean_objects_per_frame <= 0 or self.mean_frames_per_object <= 0:
            raise ConfigurationError("mean objects per frame and frames per object must be positive")
        if self.occlusion < 0:
            raise ConfigurationError(f"occlusion must be >= 0, got {self.occlusion}")
        if len(self.class_weights) != self.n_classes:
            raise ConfigurationError(
                f"{len(self.class_weights)} class weights for {self.n_classes} classes"
            )
        if any(p < 0 for p in self.class_weights) or abs(sum(self.class_weights) - 1) > 1e-9:
            raise ConfigurationError("class weights must be non-negative and sum to 1")

    @property
    def labels(self) -> Tuple[str, ...]:
        extra = tuple(f"class{k}" for k in range(len(DEFAULT_LABELS), self.n_classes))
        return (DEFAULT_LABELS + extra)[: self.n_classes]

    def replace(self, **changes) -> "FeedConfig":
        return dataclasses.replace(self, **changes)


# Statistics of the six evaluation videos. The occlusion budget is the
# rounded average number of occlusions per object.
PRESETS: Dict[str, FeedConfig] = {
    name: FeedConfig(
        n_frames=frames,
        mean_objects_per_frame=obj_f,
        mean_frames_per_object=f_obj,
        n_classes=4,
        class_weights=(0.25, 0.25, 0.25, 0.25),
        occlusion=round(occ),
    )
    for name, frames, obj_f, occ, f_obj in [
        ("V1", 1800, 7.37, 3.6, 76.71),
        ("V2", 1700, 5.94, 6.33, 79.84),
        ("D1", 1150, 7.56, 5.20, 48.61),
        ("D2", 1145, 8.99, 7.23, 65.18),
        ("M1", 1194, 6.75, 3.37, 23.67),
        ("M2", 750, 11.59, 3.48, 46.96),
    ]
}

_INT_FIELDS = {"n_frames", "n_classes", "occlusion", "seed"}
_FLOAT_FIELDS = {"mean_objects_per_frame", "mean_frames_per_object"}


def parse_feed_config(text: str, base: Optional[FeedConfig] = None) -> FeedConfig:
    """Read flat ``key=value`` lines; ``class_weights`` is comma separated.

    Keys not given keep their value from ``base`` (the defaults if None).
    """
    names = {f.name for f in dataclasses.fields(FeedConfig)}
    values: Dict[str, object] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", n)
        if key not in names:
            raise ConfigurationError(f"line {n}: unknown key {key!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value)
            elif key in _FLOAT_FIELDS:
                values[key] = float(value)
            else:
                values[key] = tuple(float(v) for v in value.split(","))
        except ValueError:
            raise ParseError(f"bad value {value!r} for {key}", n) from None
    if "n_classes" in values and "class_weights" not in values:
        k = values["n_classes"]
        values["class_weights"] = tuple([1.0 / k] * k)  # type: ignore[operator]
    return dataclasses.replace(base or FeedConfig(), **values)


def _tracks(cfg: FeedConfig, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """(start, end) frame ranges of all appearance runs, ordered by start.

    Object presence is a stationary birth-death process: Poisson arrivals at
    rate Obj/F / (F/Obj) per frame with geometric lifetimes of mean F/Obj, so
    the expected object count per frame is Obj/F from the first frame on.
    """
    p = min(1.0, 1.0 / cfg.mean_frames_per_object)
    rate = cfg.mean_objects_per_frame * p
    starts = [np.zeros(rng.poisson(cfg.mean_objects_per_frame), dtype=np.int64)]
    counts = rng.poisson(rate, size=cfg.n_frames - 1)
    starts.append(np.repeat(np.arange(1, cfg.n_frames, dtype=np.int64), counts))
    start = np.concatenate(starts)
    life = rng.geometric(p, size=start.size)
    end = np.minimum(start + life - 1, cfg.n_frames - 1)
    return list(zip(start.tolist(), end.tolist()))


def generate_feed(cfg: FeedConfig) -> VideoRelation:
    """Synthetic relation with the configured statistics.

    Runs are laid out from the seed alone. Occlusion is id reuse: a run whose
    start leaves a gap of at least one frame after some earlier id vanished
    takes over the most recently vanished such id, as long as that id has
    been reused fewer than ``occlusion`` times. Reuse never changes which
    frames are occupied, only identities, so Obj/F is independent of
    ``occlusion`` for a fixed seed and every id has at most
    ``occlusion + 1`` runs.
    """
    layout_seed, class_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    runs = _tracks(cfg, np.random.default_rng(layout_seed))
    class_rng = np.random.default_rng(class_seed)
    labels = cfg.labels
    weights = np.asarray(cfg.class_weights, dtype=float)

    frames = [0] * cfg.n_frames
    interner = Interner()
    class_of: Dict[int, str] = {}
    # ids that have vanished and may come back: (end of last run, id)
    returning: List[Tuple[int, int]] = []
    uses: Dict[int, int] = {}
    for start, end in runs:
        k = None
        if cfg.occlusion:
            # most recent vanished id with a real gap before this run
            best = -1
            for j, (last, cand) in enumerate(returning):
                if last < start - 1 and (best < 0 or last > returning[best][0]):
                    best = j
            if best >= 0:
                k = returning.pop(best)[1]
                uses[k] += 1
        if k is None:
            k = interner.intern(f"o{len(interner)}")
            class_of[k] = labels[int(class_rng.choice(len(labels), p=weights))]
            uses[k] = 0
        bit = 1 << k
        for f in range(start, end + 1):
            frames[f] |= bit
        if uses[k] < cfg.occlusion:
            returning.append((end, k))
    return VideoRelation(tuple(frames), class_of, interner)


def appearance_runs(relation: VideoRelation) -> Dict[int, int]:
    """Number of maximal contiguous appearance runs per interned id."""
    runs: Dict[int, int] = {}
    prev = 0
    for mask in relation.frames:
        for k in members(mask & ~prev):
            runs[k] = runs.get(k, 0) + 1
        prev = mask
    return runs
