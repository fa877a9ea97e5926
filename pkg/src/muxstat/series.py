"""Multi-channel PID bitrate series: loading, alignment, aggregation, histograms."""

from __future__ import annotations

import codecs
import csv
import io
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from muxstat.errors import DomainError, FormatError, MuxstatError, ParseError, SampleSizeError

#: 23 minutes spread over 2821 samples.
DEFAULT_PERIOD_MS = 489.2


@dataclass(frozen=True, eq=False)
class BitrateSeries:
    """One channel's bandwidth allocation samples, in Kbps."""

    channel_id: str
    samples: np.ndarray
    sample_period_ms: float = DEFAULT_PERIOD_MS
    category: str | None = None

    def __post_init__(self):
        values = np.array(self.samples, dtype=float)
        values.setflags(write=False)
        if values.ndim != 1 or values.size < 2:
            raise SampleSizeError(f"channel {self.channel_id!r}: need at least 2 samples")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DomainError(f"channel {self.channel_id!r}: samples must be positive and finite")
        if not self.sample_period_ms > 0:
            raise DomainError("sample_period_ms must be positive")
        object.__setattr__(self, "samples", values)
        object.__setattr__(self, "sample_period_ms", float(self.sample_period_ms))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times_ms(self) -> np.ndarray:
        return np.arange(len(self)) * self.sample_period_ms

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_ms,kbps\n")
        for t, v in zip(self.times_ms, self.samples):
            buf.write(f"{t:.6g},{v:.17g}\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    channels: tuple[BitrateSeries, ...]

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise MuxstatError("matrix needs at least one channel")
        n = len(channels[0])
        period = channels[0].sample_period_ms
        ids = [c.channel_id for c in channels]
        if len(set(ids)) != len(ids):
            raise FormatError("channel ids must be unique")
        for c in channels:
            if len(c) != n:
                raise FormatError(f"channel {c.channel_id!r} has {len(c)} samples, expected {n}")
            if c.sample_period_ms != period:
                raise FormatError(f"channel {c.channel_id!r} has a different sample period")
        object.__setattr__(self, "channels", channels)

    @property
    def n(self) -> int:
        return len(self.channels[0])

    @property
    def channel_ids(self) -> list[str]:
        return [c.channel_id for c in self.channels]

    def values(self) -> np.ndarray:
        """Samples as a (channels, n) array."""
        return np.vstack([c.samples for c in self.channels])

    def channel(self, key: str | int) -> BitrateSeries:
        """Look up a channel by label, falling back to a 0-based index."""
        for c in self.channels:
            if c.channel_id == str(key):
                return c
        try:
            return self.channels[int(key)]
        except (ValueError, IndexError):
            raise MuxstatError(f"no channel {key!r} (have: {', '.join(self.channel_ids)})") from None


@dataclass(frozen=True)
class HistogramView:
    bin_edges: np.ndarray
    densities: np.ndarray
    n: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_csv(self) -> str:
        lines = ["bin_lo,bin_hi,density"]
        for lo, hi, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.densities):
            lines.append(f"{lo:.17g},{hi:.17g},{d:.17g}")
        return "\n".join(lines) + "\n"


def load_csv(source: BinaryIO, sample_period_ms: float = DEFAULT_PERIOD_MS) -> ChannelMatrix:
    """Read a wide CSV: a header of channel labels, then one row per sample.

    A leading column named ``t`` is treated as an index and dropped.
    """
    reader = csv.reader(codecs.iterdecode(source, "utf-8"))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty input") from None
    header = [h.strip() for h in header]
    skip_index = bool(header) and header[0] == "t"
    labels = header[1:] if skip_index else header
    if not labels:
        raise FormatError("header has no channel columns")

    columns: list[list[float]] = [[] for _ in labels]
    rows = 0
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise FormatError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        cells = row[1:] if skip_index else row
        for col, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"row {row_no}, column {labels[col]!r}: not a number: {cell!r}") from None
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"row {row_no}, column {labels[col]!r}: value must be positive, got {cell!r}")
            columns[col].append(value)
        rows += 1
    if rows < 2:
        raise SampleSizeError(f"need at least 2 data rows, got {rows}")
    return ChannelMatrix(tuple(BitrateSeries(label, col, sample_period_ms) for label, col in zip(labels, columns)))


def synchronize(series: Sequence[BitrateSeries]) -> ChannelMatrix:
    """Align channels by sample index, truncating all to the shortest length."""
    series = list(series)
    if not series:
        raise MuxstatError("synchronize needs at least one series")
    periods = {s.sample_period_ms for s in series}
    if len(periods) > 1:
        raise FormatError(f"sample periods differ: {sorted(periods)}")
    n = min(len(s) for s in series)
    return ChannelMatrix(tuple(
        s if len(s) == n else BitrateSeries(s.channel_id, s.samples[:n], s.sample_period_ms, s.category)
        for s in series
    ))


def aggregate_sum(matrix: ChannelMatrix) -> BitrateSeries:
    """Total multiplexer allocation per sample instant."""
    total = np.zeros(matrix.n)
    # fixed channel order keeps the float sum bit-stable
    for c in matrix.channels:
        total = total + c.samples
    return BitrateSeries("aggregate", total, matrix.channels[0].sample_period_ms)


def pool_samples(matrix: ChannelMatrix) -> np.ndarray:
    return np.concatenate([c.samples for c in matrix.channels])


def iqr(samples) -> float:
    """Interquartile range with linear interpolation between order statistics."""
    q1, q3 = np.percentile(np.asarray(samples, dtype=float), [25, 75], method="linear")
    return float(q3 - q1)


def build_histogram(samples: Iterable[float], bins: str | int = "auto") -> HistogramView:
    """Density-normalized histogram.

    ``bins="auto"`` uses the Freedman-Diaconis width ``2 IQR n^(-1/3)`` and
    falls back to ``ceil(sqrt(n))`` bins when the IQR is zero.
    """
    x = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise SampleSizeError("histogram needs at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    lo, hi = float(x.min()), float(x.max())

    if isinstance(bins, str):
        if bins != "auto":
            raise DomainError(f"bins must be 'auto' or a positive count, got {bins!r}")
        count = None
    else:
        count = int(bins)
        if count < 1:
            raise DomainError("bin count must be at least 1")

    if lo == hi:
        half = 0.5 * max(1.0, abs(lo) * 1e-6)
        edges = np.linspace(lo - half, hi + half, (count or 1) + 1)
    else:
        if count is None:
            spread = iqr(x)
            if spread > 0:
                width = 2.0 * spread * n ** (-1.0 / 3.0)
                count = max(1, math.ceil((hi - lo) / width))
            else:
                count = math.ceil(math.sqrt(n))
        edges = np.linspace(lo, hi, count + 1)

    counts, _ = np.histogram(x, bins=edges)
    densities = counts / (n * np.diff(edges))
    return HistogramView(edges, densities, n)
