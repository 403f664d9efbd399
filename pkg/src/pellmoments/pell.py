#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
pell.py: Enumerates the discriminants d with fundamental unit eps_d <= x.

Every solution (t, u) of t^2 - d u^2 = 4 with 2 < t <= x corresponds to a
power eps_d^n <= x, so scanning t and listing the square divisors u^2 of
t^2 - 4 = (t - 2)(t + 2) finds every such d; the smallest t seen for a d
belongs to the fundamental unit.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union
import hashlib
import logging
import math
import re
import time
import numpy as np
import pandas as pd
from .arith import DEFAULT_SPF_LIMIT, SpfTable, build_spf, is_discriminant, is_square
from .util import (
    CacheIntegrityError,
    CacheParseError,
    DomainError,
    TemporaryToPermanent,
    ValidationError,
    ordered_map,
)

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

DEFAULT_MAX_X = 10**7
H_MODES = ("exact", "formula", "absent")
CACHE_HEADER = re.compile(
    r"^pell-cache v1 x=(?P<x>\d+) count=(?P<count>\d+)(?: pairs=(?P<pairs>\d+))? sha=(?P<sha>[0-9a-f]{64})$"
)

_WORKER_TABLE: Optional[SpfTable] = None


@dataclass(frozen=True)
class DiscriminantRecord:
    """One discriminant with its fundamental Pell pair and optional class number."""

    d: int
    t: int
    u: int
    log_eps: float
    h: Optional[int] = None
    h_mode: str = "absent"
    flagged: bool = False

    def __post_init__(self):
        if not is_discriminant(self.d):
            raise DomainError(f"d={self.d} is not a positive non-square discriminant")
        if self.t * self.t - self.d * self.u * self.u != 4 or self.t <= 2:
            raise DomainError(f"({self.t}, {self.u}) does not solve t^2 - {self.d} u^2 = 4")
        if self.h_mode not in H_MODES:
            raise ValidationError(f"unknown h_mode {self.h_mode!r}")

    @property
    def eps(self) -> float:
        return math.exp(self.log_eps)


def log_eps(d, t, u):
    """log((t + u sqrt(d)) / 2), elementwise for arrays."""
    return np.log(t + u * np.sqrt(d)) - math.log(2.0)


@dataclass
class EnumerationRun:
    """
    The set of discriminants with eps_d <= x.

    Records live in a DataFrame with columns d, t, u, log_eps, h, h_mode,
    flagged, sorted by d.
    """

    x: int
    frame: pd.DataFrame = field(repr=False)
    pair_count: Optional[int] = None

    COLUMNS = ["d", "t", "u", "log_eps", "h", "h_mode", "flagged"]

    @classmethod
    def from_triples(
        cls, x: int, triples: List[Tuple[int, int, int]], pair_count: Optional[int]
    ) -> "EnumerationRun":
        triples = sorted(triples)
        d = np.array([tr[0] for tr in triples], dtype=np.int64)
        t = np.array([tr[1] for tr in triples], dtype=np.int64)
        u = np.array([tr[2] for tr in triples], dtype=np.int64)
        frame = pd.DataFrame(
            {
                "d": d,
                "t": t,
                "u": u,
                "log_eps": log_eps(d.astype(np.float64), t.astype(np.float64), u.astype(np.float64)),
                "h": pd.array([pd.NA] * len(d), dtype="Int64"),
                "h_mode": ["absent"] * len(d),
                "flagged": np.zeros(len(d), dtype=bool),
            }
        )
        return cls(x, frame, pair_count)

    @classmethod
    def from_records(
        cls, x: int, records: List[DiscriminantRecord], pair_count: Optional[int]
    ) -> "EnumerationRun":
        run = cls.from_triples(x, [(r.d, r.t, r.u) for r in records], pair_count)
        by_d = {r.d: r for r in records}
        ordered = [by_d[d] for d in run.frame["d"].tolist()]
        run.frame["h"] = pd.array([r.h if r.h is not None else pd.NA for r in ordered], dtype="Int64")
        run.frame["h_mode"] = [r.h_mode for r in ordered]
        run.frame["flagged"] = np.array([r.flagged for r in ordered], dtype=bool)
        return run

    def __len__(self) -> int:
        return len(self.frame)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnumerationRun):
            return NotImplemented
        return (
            self.x == other.x
            and self.pair_count == other.pair_count
            and self.frame[["d", "t", "u"]].equals(other.frame[["d", "t", "u"]])
        )

    @property
    def d_values(self) -> List[int]:
        return self.frame["d"].tolist()

    @property
    def records(self) -> Iterator[DiscriminantRecord]:
        for row in self.frame.itertuples(index=False):
            yield DiscriminantRecord(
                int(row.d),
                int(row.t),
                int(row.u),
                float(row.log_eps),
                None if pd.isna(row.h) else int(row.h),
                row.h_mode,
                bool(row.flagged),
            )

    def record(self, d: int) -> DiscriminantRecord:
        position = int(np.searchsorted(self.frame["d"].to_numpy(), d))
        if position == len(self.frame) or int(self.frame["d"].iat[position]) != d:
            raise KeyError(d)
        row = self.frame.iloc[position]
        return DiscriminantRecord(
            d,
            int(row["t"]),
            int(row["u"]),
            float(row["log_eps"]),
            None if pd.isna(row["h"]) else int(row["h"]),
            row["h_mode"],
            bool(row["flagged"]),
        )

    @property
    def has_class_numbers(self) -> bool:
        return bool(self.frame["h"].notna().all())

    def require_class_numbers(self) -> None:
        missing = self.frame["h"].isna()
        if missing.any():
            first = int(self.frame.loc[missing, "d"].iloc[0])
            raise ValidationError(
                f"{int(missing.sum())} records carry no class number, first offender d={first}"
            )

    def with_class_numbers(self, records: List[DiscriminantRecord]) -> "EnumerationRun":
        """Return a copy whose h columns are taken from records (same order as the frame)."""
        frame = self.frame.copy()
        frame["h"] = pd.array([r.h for r in records], dtype="Int64")
        frame["h_mode"] = [r.h_mode for r in records]
        frame["flagged"] = np.array([r.flagged for r in records], dtype=bool)
        return EnumerationRun(self.x, frame, self.pair_count)

    def h_mode_mix(self) -> Dict[str, int]:
        counts = self.frame["h_mode"].value_counts()
        return {mode: int(counts.get(mode, 0)) for mode in H_MODES}


def within_bound(t: int, x: int) -> bool:
    """
    within_bound decides (t + sqrt(t^2 - 4)) / 2 <= x exactly.

    The inequality is equivalent to t <= x + 1/x, i.e. t x <= x^2 + 1.
    """
    return t * x <= x * x + 1


def discriminant_of_pair(t: int, u: int) -> Optional[int]:
    """Return d(t, u) = (t^2 - 4) / u^2 if it is an integer discriminant, else None."""
    if t <= 2 or u < 1:
        raise DomainError(f"need t > 2 and u >= 1, got t={t}, u={u}")
    n = t * t - 4
    q, r = divmod(n, u * u)
    if r or q % 4 not in (0, 1) or is_square(q):
        return None
    return q


def _add_exponents(n: int, spf: np.ndarray, into: Dict[int, int]) -> None:
    while n > 1:
        p = spf.item(n)
        n //= p
        into[p] = into.get(p, 0) + 1


def _square_roots_of_square_divisors(exponents: Dict[int, int]) -> List[int]:
    roots = [1]
    for p, e in exponents.items():
        half = e // 2
        if half:
            roots = [r * p**j for r in roots for j in range(half + 1)]
    return roots


def _scan(bounds: Tuple[int, int], table: SpfTable) -> Tuple[Dict[int, Tuple[int, int]], int]:
    lo, hi = bounds
    spf = table.spf
    found: Dict[int, Tuple[int, int]] = {}
    pairs = 0
    for t in range(lo, hi + 1):
        exponents: Dict[int, int] = {}
        _add_exponents(t - 2, spf, exponents)
        _add_exponents(t + 2, spf, exponents)
        n = t * t - 4
        for u in _square_roots_of_square_divisors(exponents):
            d = n // (u * u)
            if d % 4 in (0, 1) and not is_square(d):
                pairs += 1
                if d not in found:
                    found[d] = (t, u)
    return found, pairs


def _init_worker(limit: int, memory_guard: int) -> None:
    global _WORKER_TABLE
    _WORKER_TABLE = build_spf(limit, memory_guard)


def _scan_in_worker(bounds: Tuple[int, int]) -> Tuple[Dict[int, Tuple[int, int]], int]:
    return _scan(bounds, _WORKER_TABLE)


def _blocks(lo: int, hi: int, count: int) -> List[Tuple[int, int]]:
    count = max(1, min(count, hi - lo + 1))
    edges = np.linspace(lo, hi + 1, count + 1).astype(np.int64)
    return [(int(a), int(b) - 1) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def enumerate_run(
    x: int,
    threads: int = 1,
    max_x: int = DEFAULT_MAX_X,
    memory_guard: int = DEFAULT_SPF_LIMIT,
) -> EnumerationRun:
    """
    enumerate_run lists every discriminant d with eps_d <= x.

    Parameters
    ----------
    x : int
        Bound on the fundamental unit.
    threads : int, optional
        Worker processes; the t-range is split into contiguous blocks and the
        minimal-t reduction is order independent, by default 1.
    max_x : int, optional
        Largest accepted x, by default 10^7.
    memory_guard : int, optional
        Largest accepted sieve, by default 2.5e7.

    Returns
    -------
    EnumerationRun
        Records sorted by d, and the count of all admissible (t, u) pairs.
    """
    global _WORKER_TABLE
    if not 3 <= x <= max_x:
        raise ValidationError(f"x={x} outside the supported range [3, {max_x}]")
    if x + 2 > memory_guard:
        raise ValidationError(f"x={x} needs a sieve up to {x + 2}, above the memory guard {memory_guard}")
    started = time.perf_counter()
    t_max = x
    while not within_bound(t_max, x):  # pragma: no cover
        t_max -= 1
    blocks = _blocks(3, t_max, 4 * threads if threads > 1 else 1)
    try:
        results = ordered_map(
            _scan_in_worker,
            blocks,
            threads=threads,
            initializer=_init_worker,
            initargs=(t_max + 2, memory_guard),
            chunksize=1,
        )
    finally:
        _WORKER_TABLE = None
    merged: Dict[int, Tuple[int, int]] = {}
    pair_count = 0
    for found, pairs in results:  # blocks ascend in t
        pair_count += pairs
        for d, tu in found.items():
            if d not in merged:
                merged[d] = tu
    run = EnumerationRun.from_triples(
        x, [(d, t, u) for d, (t, u) in merged.items()], pair_count
    )
    logger.info(
        "enumerated x=%d: %d discriminants, %d pairs in %.2fs",
        x,
        len(run),
        pair_count,
        time.perf_counter() - started,
    )
    return run


def density_report(run: EnumerationRun) -> float:
    """|records| / x, which tends to 35/16."""
    if len(run) == 0:
        raise ValidationError("empty run")
    return len(run) / run.x


def non_fundamental_pairs(run: EnumerationRun) -> Optional[int]:
    """
    Number of pairs (t, u) that belong to a power eps_d^n with n >= 2.

    None when the run does not know its pair count (a cache without the
    pairs key).
    """
    if run.pair_count is None:
        return None
    return run.pair_count - len(run)


def large_u_count(run: EnumerationRun, delta: float) -> int:
    """Number of fundamental pairs with u > x^delta."""
    return int((run.frame["u"] > run.x**delta).sum())


def _body(run: EnumerationRun) -> str:
    return "".join(f"{d},{t},{u}\n" for d, t, u in run.frame[["d", "t", "u"]].itertuples(index=False))


def cache_write(run: EnumerationRun, path: Union[str, Path]) -> Path:
    """
    cache_write stores the d, t, u triples of a run in the text cache format.

    The first line is `pell-cache v1 x=<x> count=<n> pairs=<pairs> sha=<sha256 of body>`,
    followed by one `d,t,u` line per record sorted by d.
    """
    path = Path(path)
    body = _body(run)
    sha = hashlib.sha256(body.encode("ascii")).hexdigest()
    pairs = "" if run.pair_count is None else f" pairs={run.pair_count}"
    header = f"pell-cache v1 x={run.x} count={len(run)}{pairs} sha={sha}\n"
    with TemporaryToPermanent(path).open("w", newline="") as fh:
        fh.write(header)
        fh.write(body)
    logger.debug("cached %d records to %s", len(run), path)
    return path


def cache_read(path: Union[str, Path]) -> EnumerationRun:
    """
    cache_read loads a run written by cache_write and re-validates it.

    Raises
    ------
    CacheParseError
        If a line is malformed; the error names the line number.
    CacheIntegrityError
        If the checksum, the count or a record invariant does not hold.
    """
    data = Path(path).read_bytes()
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as error:
        line_number = data.count(b"\n", 0, error.start) + 1
        raise CacheParseError(
            f"non-ASCII byte 0x{data[error.start]:02x} at offset {error.start}", line_number
        ) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CacheParseError("empty cache file", 1)
    header = CACHE_HEADER.match(lines[0])
    if header is None:
        raise CacheParseError(f"unrecognised header {lines[0][:60]!r}", 1)
    x = int(header.group("x"))
    triples = []
    for line_number, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 3 or not all(f.isdigit() for f in fields):
            raise CacheParseError(f"expected 'd,t,u', got {line[:60]!r}", line_number)
        triples.append(tuple(int(f) for f in fields))
    body = "".join(line + "\n" for line in lines[1:])
    if hashlib.sha256(body.encode("ascii")).hexdigest() != header.group("sha"):
        raise CacheIntegrityError(f"{path}: checksum mismatch")
    if len(triples) != int(header.group("count")):
        raise CacheIntegrityError(
            f"{path}: header announces {header.group('count')} records, found {len(triples)}"
        )
    previous = 0
    for line_number, (d, t, u) in enumerate(triples, start=2):
        if d <= previous:
            raise CacheIntegrityError(f"line {line_number}: d={d} not strictly ascending")
        previous = d
        if not is_discriminant(d) or t <= 2 or t * t - d * u * u != 4:
            raise CacheIntegrityError(f"line {line_number}: ({d},{t},{u}) is not a Pell solution")
        if not within_bound(t, x):
            raise CacheIntegrityError(f"line {line_number}: t={t} exceeds the bound x={x}")
    pairs = header.group("pairs")
    return EnumerationRun.from_triples(x, triples, None if pairs is None else int(pairs))
