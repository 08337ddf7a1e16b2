"""Forecast-outcome archives and empirical scores.

An archive is a sequence of records, each pairing one realized outcome
with the forecast densities that several named systems issued for it.
The canonical storage format is JSON lines, one record per line:

    {"forecasts": {"A": {"type": "gaussian_mixture", ...},
                   "B": {...}},
     "outcome": 1.23}

A flat CSV format (columns ``outcome`` plus ``<system>_mu`` and
``<system>_sigma`` per system) is accepted for the common
single-Gaussian-per-system case.

Empirical scores are plain means over records (pairwise numpy summation,
so results do not depend on accumulation order tricks).  Infinite
ignorance contributions are never dropped: the aggregate is flagged and
the offending record count reported, and any density floor must be
requested explicitly.

``relative_empirical_ignorance`` is the archive-level comparison that
needs no truth distribution at all: the mean of -log2 of the density
ratio between two systems at the realized outcomes.  Its
``probability_ratio`` reading is 2 to the minus bits: -1 bit means the
first system assigned twice the probability on average.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .distributions import density_from_json, density_to_json, gaussian
from .scores import ScoreSpec, score

__all__ = [
    "ForecastRecord", "EmpiricalScore", "RelativeIgnorance", "EvalReport",
    "load_archive", "load_archive_csv",
    "empirical_score", "relative_empirical_ignorance", "evaluate_archive",
]

_INV_LN2 = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class ForecastRecord:
    """One archive entry: named forecast densities and the outcome."""

    forecasts: dict
    outcome: float
    line: Optional[int] = None

    def __post_init__(self):
        if not self.forecasts:
            raise ValueError("record needs at least one forecast system")
        if not math.isfinite(self.outcome):
            raise ValueError("outcome must be a finite number")

    def to_json(self) -> dict:
        return {
            "forecasts": {name: density_to_json(d)
                          for name, d in self.forecasts.items()},
            "outcome": self.outcome,
        }


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        yield from io.StringIO(data)
        return
    yield from source


def load_archive(source) -> list:
    """Parse a JSON-lines archive from a path, stream, or line iterable.

    Every error message names the offending 1-based line, so a broken
    record in a large archive can be found directly.  Blank lines are
    skipped; an empty stream yields an empty archive (scoring one is the
    caller's error, not parsing's).
    """
    records = []
    for k, line in enumerate(_iter_lines(source), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON ({exc.msg}), line {k}") from None
        if not isinstance(obj, dict):
            raise ValueError(f"record must be a JSON object, line {k}")
        try:
            records.append(_record_from_json(obj, k))
        except ValueError as exc:
            raise ValueError(f"{exc}, line {k}") from None
    return records


def _record_from_json(obj: dict, line: int) -> ForecastRecord:
    unknown = set(obj) - {"forecasts", "outcome"}
    if unknown:
        raise ValueError(f"unknown record field {sorted(unknown)[0]!r}")
    fc = obj.get("forecasts")
    if not isinstance(fc, dict) or not fc:
        raise ValueError("forecasts must be a non-empty object")
    outcome = obj.get("outcome")
    if not isinstance(outcome, (int, float)) or isinstance(outcome, bool) \
            or not math.isfinite(float(outcome)):
        raise ValueError("outcome must be a finite number")
    densities = {}
    for name, spec in fc.items():
        densities[str(name)] = density_from_json(spec)
    return ForecastRecord(forecasts=densities, outcome=float(outcome),
                          line=line)


def load_archive_csv(source) -> list:
    """Parse the flat CSV archive format.

    The header must contain ``outcome`` and a ``<system>_mu`` /
    ``<system>_sigma`` column pair per system; each row becomes a record
    of single-Gaussian forecasts.
    """
    rows = list(csv.reader(_iter_lines(source)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        return []
    header = [h.strip() for h in rows[0]]
    if "outcome" not in header:
        raise ValueError("CSV archive header needs an 'outcome' column")
    systems = []
    for h in header:
        if h.endswith("_mu"):
            name = h[:-3]
            if f"{name}_sigma" not in header:
                raise ValueError(f"CSV archive column {h!r} has no "
                                 f"matching {name}_sigma column")
            systems.append(name)
    if not systems:
        raise ValueError("CSV archive header names no forecast systems")
    idx = {h: i for i, h in enumerate(header)}

    records = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"expected {len(header)} columns, got "
                             f"{len(row)}, line {k}")
        try:
            outcome = float(row[idx["outcome"]])
            forecasts = {
                name: gaussian(float(row[idx[f"{name}_mu"]]),
                               float(row[idx[f"{name}_sigma"]]))
                for name in systems
            }
            records.append(ForecastRecord(forecasts=forecasts,
                                          outcome=outcome, line=k))
        except ValueError as exc:
            msg = str(exc)
            if msg.endswith(f"line {k}"):
                raise
            raise ValueError(f"{msg}, line {k}") from None
    return records


@dataclass(frozen=True)
class EmpiricalScore:
    """Mean score over an archive, with infinite contributions flagged."""

    value: float
    count: int
    infinite_count: int = 0

    @property
    def infinite(self) -> bool:
        return self.infinite_count > 0


def _require_system(records: Sequence[ForecastRecord], system: str):
    if not records:
        raise ValueError("archive is empty")
    for rec in records:
        if system not in rec.forecasts:
            where = f"line {rec.line}" if rec.line is not None else "a record"
            raise ValueError(f"system {system!r} is missing from {where}")


def empirical_score(spec: ScoreSpec, records: Sequence[ForecastRecord],
                    system: str, *, seed: Optional[int] = None,
                    n: int = 1_000_000,
                    density_floor: Optional[float] = None) -> EmpiricalScore:
    """Arithmetic mean of the per-record scores for one system.

    Monte-Carlo families draw an independent child stream per record
    from ``seed``.   An infinite ignorance contribution makes the mean
    infinite and is counted, never silently dropped.
    """
    _require_system(records, system)
    if spec.family == "energy":
        if seed is None:
            raise ValueError("energy score requires an explicit seed")
        streams = np.random.SeedSequence(seed).spawn(len(records))
    vals = np.empty(len(records))
    infinite_count = 0
    for i, rec in enumerate(records):
        kw = {}
        if spec.family == "energy":
            kw = {"seed": streams[i], "n": n}
        sv = score(spec, rec.forecasts[system], rec.outcome,
                   density_floor=density_floor, **kw)
        if sv.infinite:
            infinite_count += 1
        vals[i] = sv.value
    return EmpiricalScore(value=float(np.mean(vals)), count=len(records),
                          infinite_count=infinite_count)


class RelativeIgnorance(NamedTuple):
    """Mean ignorance difference in bits and its probability-mass reading."""

    bits: float
    probability_ratio: float


def relative_empirical_ignorance(records: Sequence[ForecastRecord],
                                 system1: str, system2: str,
                                 ) -> RelativeIgnorance:
    """Mean of -log2(p1(Y)/p2(Y)) over the archive.

    Needs no truth distribution.  A value of -1 bit means ``system1``
    assigned on average twice the probability density to what happened
    (``probability_ratio`` 2).  A record where both densities vanish has
    no defined ratio and raises, naming the record.
    """
    _require_system(records, system1)
    _require_system(records, system2)
    bits = np.empty(len(records))
    for i, rec in enumerate(records):
        lp1 = _log_density(rec.forecasts[system1], rec.outcome)
        lp2 = _log_density(rec.forecasts[system2], rec.outcome)
        if lp1 == -math.inf and lp2 == -math.inf:
            where = f"line {rec.line}" if rec.line is not None else f"record {i + 1}"
            raise ValueError("both forecasts assign zero density to the "
                             f"outcome ({where}); the ratio is undefined")
        bits[i] = -(lp1 - lp2) * _INV_LN2
    mean_bits = float(np.mean(bits))
    return RelativeIgnorance(bits=mean_bits,
                             probability_ratio=2.0 ** (-mean_bits))


def _log_density(d, y: float) -> float:
    if hasattr(d, "log_pdf"):
        return float(d.log_pdf(y))
    p = float(d.pdf(y))
    return math.log(p) if p > 0.0 else -math.inf


@dataclass(frozen=True)
class EvalReport:
    """Archive evaluation: per-system means and pairwise relative bits."""

    systems: tuple
    count: int
    scores: dict
    relative: tuple

    def to_json(self) -> dict:
        return {
            "records": self.count,
            "systems": {
                name: {
                    label: {
                        "mean": _round9(es.value),
                        "infinite_records": es.infinite_count,
                    }
                    for label, es in per_family.items()
                }
                for name, per_family in self.scores.items()
            },
            "relative_ignorance": [
                {
                    "system1": s1,
                    "system2": s2,
                    "bits": _round9(ri.bits),
                    "probability_ratio": _round9(ri.probability_ratio),
                }
                for s1, s2, ri in self.relative
            ],
        }


def _round9(x: float):
    """Emit at 9 significant digits; infinities become labelled strings."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "infinity" if x > 0 else "-infinity"
    return float(f"{x:.9g}")


def evaluate_archive(records: Sequence[ForecastRecord],
                     specs: Sequence[ScoreSpec], *,
                     systems: Optional[Sequence[str]] = None,
                     seed: Optional[int] = None, n: int = 1_000_000,
                     density_floor: Optional[float] = None) -> EvalReport:
    """Score every system under every spec and compare all system pairs.

    ``systems`` defaults to the first record's, sorted.  Relative
    ignorance is reported for each unordered pair in that order.
    """
    if not records:
        raise ValueError("archive is empty")
    if systems is None:
        systems = sorted(records[0].forecasts)
    systems = tuple(systems)
    scores = {
        name: {
            spec.label(): empirical_score(spec, records, name, seed=seed,
                                          n=n, density_floor=density_floor)
            for spec in specs
        }
        for name in systems
    }
    relative = tuple(
        (s1, s2, relative_empirical_ignorance(records, s1, s2))
        for i, s1 in enumerate(systems)
        for s2 in systems[i + 1:]
    )
    return EvalReport(systems=systems, count=len(records), scores=scores,
                      relative=relative)
