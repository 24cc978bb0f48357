"""Path datasets: parsing, temporal path extraction, rolling windows, statistics.

A path is an ordered node sequence with a multiplicity and an optional start
timestamp. Datasets are immutable after construction and merge identical
(sequence, start_time) entries by summing multiplicities.
"""
from __future__ import annotations

import logging
import statistics
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

from .errors import DataError

log = logging.getLogger(__name__)

#: Reserved marker for the synthetic start state of every encoded path.
START = "*"
#: Reserved marker for the absorbing end state of every encoded path.
END = "†"

RESERVED = frozenset({START, END})


@dataclass(frozen=True)
class Path:
    """An ordered node sequence observed ``multiplicity`` times."""

    nodes: tuple[str, ...]
    multiplicity: int = 1
    start_time: int | None = None

    def __post_init__(self):
        if len(self.nodes) < 1:
            raise DataError("a path needs at least one node")
        if self.multiplicity < 1:
            raise DataError("path multiplicity must be >= 1")
        for v in self.nodes:
            if not v:
                raise DataError("empty node label")
            if v in RESERVED:
                raise DataError(f"node label {v!r} is reserved")

    def __len__(self) -> int:
        return len(self.nodes)


class PathDataset:
    """An immutable multiset of paths over a shared vocabulary."""

    def __init__(self, paths: Iterable[Path]):
        merged: dict[tuple[tuple[str, ...], int | None], int] = {}
        for p in paths:
            key = (p.nodes, p.start_time)
            merged[key] = merged.get(key, 0) + p.multiplicity
        if not merged:
            raise DataError("empty dataset")
        self._paths = tuple(
            Path(nodes, mult, t)
            for (nodes, t), mult in sorted(
                merged.items(), key=lambda kv: (kv[0][0], kv[0][1] is not None, kv[0][1] or 0)
            )
        )
        vocab: set[str] = set()
        for p in self._paths:
            vocab.update(p.nodes)
        self._vocabulary = frozenset(vocab)

    @property
    def paths(self) -> tuple[Path, ...]:
        return self._paths

    @property
    def vocabulary(self) -> frozenset[str]:
        return self._vocabulary

    @property
    def total(self) -> int:
        """Number of path instances, multiplicities included."""
        return sum(p.multiplicity for p in self._paths)

    @property
    def unique(self) -> int:
        """Number of distinct node sequences."""
        return len({p.nodes for p in self._paths})

    @property
    def max_length(self) -> int:
        return max(len(p) for p in self._paths)

    @property
    def has_timestamps(self) -> bool:
        return all(p.start_time is not None for p in self._paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self._paths)

    def __len__(self) -> int:
        return len(self._paths)


@dataclass(frozen=True)
class TemporalEdge:
    source: str
    target: str
    time: int


@dataclass(frozen=True)
class ActionRecord:
    """A time-stamped action by ``actor`` on the work item ``key``."""

    key: str
    actor: str
    time: int

    def __post_init__(self):
        if not self.key:
            raise DataError("action record with empty key")


@dataclass(frozen=True)
class DatasetStats:
    total_paths: int
    unique_paths: int
    mean_len: float
    median_len: float
    n_nodes: int
    n_links: int

    def as_dict(self) -> dict:
        return {
            "total_paths": self.total_paths,
            "unique_paths": self.unique_paths,
            "mean_len": self.mean_len,
            "median_len": self.median_len,
            "n_nodes": self.n_nodes,
            "n_links": self.n_links,
        }


@dataclass(frozen=True)
class WindowSlice:
    """One rolling window; ``dataset`` is None when the window is empty."""

    start: int
    length: int
    dataset: PathDataset | None

    @property
    def end(self) -> int:
        return self.start + self.length

    @property
    def empty(self) -> bool:
        return self.dataset is None


def parse_paths(source: TextIO | Iterable[str], delimiter: str = ",") -> PathDataset:
    """Parse a path file: one path per line, ``;count`` / ``;timestamp`` suffixes optional.

    Identical lines are merged with summed multiplicities. Blank lines are
    skipped with a warning; malformed count or timestamp fields raise
    :class:`DataError` with the line number.
    """
    paths = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            log.warning("skipping empty line %d", lineno)
            continue
        fields = line.split(";")
        nodes = tuple(n.strip() for n in fields[0].split(delimiter) if n.strip())
        if not nodes:
            raise DataError(f"line {lineno}: no nodes")
        mult = 1
        start_time = None
        if len(fields) >= 2 and fields[1].strip():
            try:
                mult = int(fields[1])
            except ValueError:
                raise DataError(f"line {lineno}: malformed count {fields[1]!r}") from None
            if mult < 1:
                raise DataError(f"line {lineno}: count must be >= 1")
        if len(fields) >= 3 and fields[2].strip():
            try:
                start_time = int(fields[2])
            except ValueError:
                raise DataError(f"line {lineno}: malformed timestamp {fields[2]!r}") from None
        if len(fields) > 3:
            raise DataError(f"line {lineno}: too many fields")
        paths.append(Path(nodes, mult, start_time))
    if not paths:
        raise DataError("empty dataset")
    return PathDataset(paths)


def write_paths(ds: PathDataset, out: TextIO, delimiter: str = ",") -> None:
    """Write a dataset in the canonical path-file format."""
    for p in ds.paths:
        line = delimiter.join(p.nodes) + f";{p.multiplicity}"
        if p.start_time is not None:
            line += f";{p.start_time}"
        out.write(line + "\n")


def paths_from_actions(records: Sequence[ActionRecord]) -> PathDataset:
    """Build one path per key: actors ordered by timestamp, stable on ties.

    The path's start_time is the first action's timestamp.
    """
    groups: dict[str, list[ActionRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.key].append(rec)
    paths = []
    for key, recs in groups.items():
        ordered = sorted(recs, key=lambda r: r.time)  # sorted() is stable
        paths.append(
            Path(tuple(r.actor for r in ordered), 1, ordered[0].time)
        )
    if not paths:
        raise DataError("no action records")
    return PathDataset(paths)


def extract_paths(edges: Sequence[TemporalEdge], delta: int) -> PathDataset:
    """Extract time-respecting paths from a temporal edge list.

    Two edges (u,v;t1), (v,w;t2) chain iff t1 < t2 and t2 - t1 <= delta.
    Chaining is greedy and single-consumption: edges are processed in
    ascending time; each edge extends the oldest open chain it can continue,
    or opens a new chain. Every input edge appears on exactly one path.
    """
    if delta <= 0:
        raise DataError("delta must be > 0")
    if not edges:
        raise DataError("empty edge list")
    order = sorted(range(len(edges)), key=lambda i: (edges[i].time, i))
    # chain: [nodes, end_time, start_time, creation_seq]
    chains: list[list] = []
    open_by_node: dict[str, list[int]] = defaultdict(list)
    for i in order:
        e = edges[i]
        extended = None
        candidates = open_by_node.get(e.source, [])
        for ci in candidates:
            nodes, end_t, _, _ = chains[ci]
            if end_t < e.time and e.time - end_t <= delta:
                extended = ci
                break
        if extended is not None:
            open_by_node[e.source].remove(extended)
            chains[extended][0].append(e.target)
            chains[extended][1] = e.time
            open_by_node[e.target].append(extended)
        else:
            chains.append([[e.source, e.target], e.time, e.time, len(chains)])
            open_by_node[e.target].append(len(chains) - 1)
    return PathDataset(
        Path(tuple(nodes), 1, start_t) for nodes, _, start_t, _ in chains
    )


def rolling_windows(ds: PathDataset, length: int, shift: int) -> list[WindowSlice]:
    """Slice a timestamped dataset into rolling half-open windows.

    The first window starts at the minimum start_time rounded down to the
    shift granularity; windows advance by ``shift`` until every path is
    covered. A path belongs to a window iff start <= t < start + length.
    Empty windows are kept, with ``dataset`` set to None.
    """
    if length <= 0 or shift <= 0:
        raise DataError("window length and shift must be > 0")
    if not ds.has_timestamps:
        raise DataError("rolling windows require timestamps on every path")
    times = [p.start_time for p in ds.paths]
    t_min, t_max = min(times), max(times)
    anchor = (t_min // shift) * shift
    out = []
    start = anchor
    while start <= t_max:
        members = [p for p in ds.paths if start <= p.start_time < start + length]
        out.append(
            WindowSlice(start, length, PathDataset(members) if members else None)
        )
        start += shift
    return out


def stats(ds: PathDataset) -> DatasetStats:
    """Summary statistics; totals and length statistics include multiplicity."""
    lengths = []
    links = set()
    for p in ds.paths:
        lengths.extend([len(p)] * p.multiplicity)
        for a, b in zip(p.nodes, p.nodes[1:]):
            links.add((a, b))
    return DatasetStats(
        total_paths=ds.total,
        unique_paths=ds.unique,
        mean_len=sum(lengths) / len(lengths),
        median_len=statistics.median(lengths),
        n_nodes=len(ds.vocabulary),
        n_links=len(links),
    )


def read_temporal_edges(source: TextIO | Iterable[str], delimiter: str = ",") -> list[TemporalEdge]:
    """Read a ``source,target,time`` edge list (header optional)."""
    edges = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [f.strip() for f in line.split(delimiter)]
        if len(parts) != 3:
            raise DataError(f"line {lineno}: expected source,target,time")
        if lineno == 1 and not _is_int(parts[2]):
            continue  # header row
        if not _is_int(parts[2]):
            raise DataError(f"line {lineno}: malformed timestamp {parts[2]!r}")
        edges.append(TemporalEdge(parts[0], parts[1], int(parts[2])))
    if not edges:
        raise DataError("empty edge list")
    return edges


def read_actions(source: TextIO | Iterable[str], delimiter: str = ",") -> list[ActionRecord]:
    """Read a ``key,actor,time`` action log (header optional)."""
    records = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [f.strip() for f in line.split(delimiter)]
        if len(parts) != 3:
            raise DataError(f"line {lineno}: expected key,actor,time")
        if lineno == 1 and not _is_int(parts[2]):
            continue
        if not _is_int(parts[2]):
            raise DataError(f"line {lineno}: malformed timestamp {parts[2]!r}")
        records.append(ActionRecord(parts[0], parts[1], int(parts[2])))
    if not records:
        raise DataError("no action records")
    return records


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True
