"""Run method/protocol pairings over streams and collect per-point metric summaries."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

import numpy as np

from .exceptions import BadParams
from .metrics import attribute, stats_rows, summarize
from .methods import METHODS
from .protocols import PROTOCOLS, check_pairing, decode_bytes, dump_stream, encode


class Pairing(NamedTuple):
    key: Optional[str]
    method: str
    protocol: str


#: Keyed associations of the reference evaluation that this package implements.
KEYED_PAIRINGS = (
    Pairing("A1", "angle", "two-streams"),
    Pairing("A2", "angle", "single-stream"),
    Pairing("A3", "angle", "single-stream-v"),
    Pairing("C1", "disjoint", "two-streams"),
    Pairing("C2", "disjoint", "single-stream"),
    Pairing("C3", "disjoint", "single-stream-v"),
    Pairing("L1", "linear", "two-streams"),
    Pairing("L2", "linear", "single-stream"),
    Pairing("L3", "linear", "single-stream-v"),
    Pairing("Sw", "swing", "implicit"),
    Pairing("Sl", "disjoint", "implicit"),
)

#: Keys of associations whose methods are not implemented here.
OUT_OF_SCOPE = {"C": "Optimal Continuous", "M": "MixedPLA"}


def legal_pairings() -> list[Pairing]:
    """Every method/protocol combination the encoder accepts, keyed ones first."""
    keyed = {(p.method, p.protocol) for p in KEYED_PAIRINGS}
    extra = [
        Pairing(None, m, p)
        for m in METHODS
        for p in PROTOCOLS
        if (m, p) not in keyed and (p == "implicit" or m != "swing")
    ]
    return list(KEYED_PAIRINGS) + extra


def pairing_key(method, protocol) -> Optional[str]:
    for p in KEYED_PAIRINGS:
        if p.method == method and p.protocol == protocol:
            return p.key
    return None


def pairing_label(method, protocol) -> str:
    return pairing_key(method, protocol) or f"{method}+{protocol}"


class RunConfig(NamedTuple):
    method: str
    protocol: str
    epsilon: float
    max_length: Optional[int] = None
    min_length: Optional[int] = None
    # added to timestamps before compressing; None shifts implicit runs to start at 1
    t_offset: Optional[float] = None


class RunResult(NamedTuple):
    run_id: str
    config: RunConfig
    n: int
    nbytes: int
    records: int
    max_error: float
    violations: int
    summary: dict

    @property
    def ok(self):
        return self.violations == 0


class Report(NamedTuple):
    results: list
    notices: list

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def rows(self):
        for r in self.results:
            if not r.summary:
                continue
            c = r.config
            yield from stats_rows(r.run_id, c.method, c.protocol, c.epsilon, r.summary)


def implicit_offset(t) -> float:
    """Shift that makes the first timestamp 1 when it is not already positive."""
    if len(t) and t[0] <= 0:
        return 1.0 - float(t[0])
    return 0.0


def run_config(config: RunConfig, t, y, run_id="0") -> RunResult:
    """Compress, serialise, decode and attribute one stream under ``config``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise BadParams("t and y must be 1-D arrays of equal length")
    offset = config.t_offset
    if offset is None:
        offset = implicit_offset(t) if config.protocol == "implicit" else 0.0
    ts = t + offset if offset else t
    kw = {}
    if config.max_length is not None:
        kw["max_length"] = config.max_length
    if config.min_length is not None:
        kw["min_length"] = config.min_length
    res = encode(config.method, config.protocol, ts.tolist(), y.tolist(), config.epsilon, **kw)
    blobs = [
        dump_stream(config.protocol, name, config.method, config.epsilon, recs)
        for name, recs in res.streams.items()
    ]
    y_approx = decode_bytes(ts, *blobs)
    err = np.abs(y_approx - y)
    stats = attribute(res.emissions, y, y_approx)
    return RunResult(
        run_id=run_id,
        config=config,
        n=len(y),
        nbytes=res.nbytes,
        records=sum(len(recs) for recs in res.streams.values()),
        max_error=float(err.max()) if len(err) else 0.0,
        violations=int(np.count_nonzero(~(err < config.epsilon))),
        summary=summarize(stats) if len(y) else {},
    )


def expand_configs(pairings, epsilons, max_length=None, min_length=None, t_offset=None):
    """Cartesian product of ``(method, protocol)`` pairings and epsilons."""
    out = []
    for method, protocol in pairings:
        check_pairing(method, protocol)
        for eps in epsilons:
            out.append(RunConfig(method, protocol, float(eps), max_length, min_length, t_offset))
    return out


def run_evaluate(configs: Iterable[RunConfig], streams) -> Report:
    """Run every config on every ``(name, t, y)`` stream.

    Illegal pairings raise :class:`IllegalPairing` before anything runs.
    """
    configs = list(configs)
    for c in configs:
        check_pairing(c.method, c.protocol)
    notices = [f"{key} ({name}): not implemented, skipped" for key, name in OUT_OF_SCOPE.items()]
    results = []
    for name, t, y in streams:
        for c in configs:
            run_id = f"{pairing_label(c.method, c.protocol)}:{name}"
            results.append(run_config(c, t, y, run_id))
    return Report(results, notices)

