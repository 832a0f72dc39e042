"""Per-point compression ratio, reconstruction latency and error, plus box-plot summaries."""

from __future__ import annotations

import csv
import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import DoubleCoverage, EmptyInput, UncoveredIndex

METRICS = ("ratio", "latency", "error")

STATS_COLUMNS = (
    "run_id",
    "method",
    "protocol",
    "epsilon",
    "metric",
    "mean",
    "p25",
    "p75",
    "whisker_lo",
    "whisker_hi",
    "max",
)


class PerPointStats(NamedTuple):
    """Column arrays indexed by input position."""

    ratio: np.ndarray
    latency: np.ndarray
    error: np.ndarray

    def __len__(self):
        return len(self.ratio)

    def rows(self):
        for i, (r, lat, e) in enumerate(zip(self.ratio, self.latency, self.error)):
            yield i, float(r), int(lat), float(e)


class Aggregate(NamedTuple):
    mean: float
    p25: float
    p75: float
    whisker_lo: float
    whisker_hi: float
    max: float


def attribute(emissions, originals, reconstructed) -> PerPointStats:
    """Attribute each input index to the emission that reconstructs it.

    Every point covered by an emission gets ``size / count`` as its ratio (in
    y-value units), ``emitted_at - i`` as its latency and ``|y' - y|`` as its
    error.
    """
    y = np.asarray(originals, dtype=float)
    y_approx = np.asarray(reconstructed, dtype=float)
    n = len(y)
    if len(y_approx) != n:
        raise ValueError(f"{len(y_approx)} reconstructed values for {n} originals")
    ratio = np.zeros(n)
    emitted = np.full(n, -1, dtype=np.int64)
    hits = np.zeros(n, dtype=np.int64)
    for e in emissions:
        if e.start < 0 or e.stop > n:
            raise UncoveredIndex(f"emission covers {e.start}..{e.stop - 1}, outside 0..{n - 1}")
        sl = slice(e.start, e.stop)
        hits[sl] += 1
        ratio[sl] = e.nbytes / 8 / e.count
        emitted[sl] = e.emitted_at
    if (hits > 1).any():
        raise DoubleCoverage(f"index {int(np.argmax(hits > 1))} is covered more than once")
    if (hits == 0).any():
        raise UncoveredIndex(f"index {int(np.argmin(hits))} is not covered")
    latency = emitted - np.arange(n)
    return PerPointStats(ratio, latency, np.abs(y_approx - y))


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """Smallest value with at least ``q`` percent of the data at or below it."""
    n = len(sorted_values)
    k = max(1, math.ceil(q / 100.0 * n))
    return sorted_values[k - 1]


def aggregate(values: Iterable[float]) -> Aggregate:
    if not isinstance(values, (np.ndarray, list, tuple)):
        values = list(values)
    data = np.sort(np.asarray(values, dtype=float).ravel())
    if data.size == 0:
        raise EmptyInput("cannot aggregate an empty sample")
    p25 = float(nearest_rank(data, 25))
    p75 = float(nearest_rank(data, 75))
    reach = 1.5 * (p75 - p25)
    inside = data[(data >= p25 - reach) & (data <= p75 + reach)]
    return Aggregate(
        mean=float(data.mean()),
        p25=p25,
        p75=p75,
        whisker_lo=float(inside[0]),
        whisker_hi=float(inside[-1]),
        max=float(data[-1]),
    )


def summarize(stats: PerPointStats) -> dict[str, Aggregate]:
    return {name: aggregate(getattr(stats, name)) for name in METRICS}


def stats_rows(run_id, method, protocol, epsilon, summary: dict[str, Aggregate]):
    for metric in METRICS:
        agg = summary[metric]
        yield {"run_id": run_id, "method": method, "protocol": protocol, "epsilon": epsilon,
               "metric": metric, **agg._asdict()}


def write_stats_csv(fh, rows) -> int:
    """Write stats rows (dicts keyed by column name) to an open text file."""
    writer = csv.DictWriter(fh, fieldnames=STATS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow(row)
        count += 1
    return count
