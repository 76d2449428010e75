"""Exhaustive rational-point censuses of definable sets.

Point counts, per-projection fiber histograms, exact entropy profiles of
the uniform distribution on the rational points, tower censuses across
extension degrees, and the recovery of the growth law count ~ mu * q^d
together with its period in the extension degree.

A fiber histogram records, for a projection onto the variables I, how many
projected points have each fiber size.  Empty fibers carry probability
zero and are excluded from the buckets; the number of points of the
ambient space missed by the projection is kept separately as ``outside``
(a density diagnostic).  Entropies of uniform distributions depend only on
these bucket counts:

    h(I) = log|X| - (1/|X|) * sum_s N_s * s * log s,

an exact LogValue because all counts are integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import enumeration
from .enumeration import DEFAULT_MAX_EVALS
from .errors import DomainError, EstimationError
from .extend import Distribution
from .gf import FieldSpec, field
from .logval import LogValue, log_of_rat
from .polymatroid import Profile
from .ringlang import DefinableSet

DEFAULT_DENOM_CAP = 64
DEFAULT_CONSISTENCY = 8


@dataclass(frozen=True)
class FiberHistogram:
    subset: tuple            # projection variables, in declaration order
    total: int               # |X(G)|
    buckets: dict            # fiber size s >= 1 -> number of projected points
    outside: int             # q^|I| - number of nonempty fibers

    def __post_init__(self):
        if sum(s * n for s, n in self.buckets.items()) != self.total:
            raise DomainError("fiber histogram does not account for every point")
        if any(s < 1 for s in self.buckets):
            raise DomainError("empty fibers do not belong in the buckets")

    def to_json(self):
        return {
            "total": self.total,
            "buckets": {str(s): n for s, n in sorted(self.buckets.items())},
            "outside": self.outside,
        }


@dataclass(frozen=True)
class CensusRow:
    e: int
    q: int
    count: int
    fibers: dict | None = None   # subset tuple -> FiberHistogram


@dataclass(frozen=True)
class CensusTable:
    set_name: str
    p: int
    rows: tuple

    def to_json(self):
        rows = []
        for r in self.rows:
            row = {"e": r.e, "q": r.q, "count": r.count}
            if r.fibers is not None:
                row["fibers"] = {
                    ",".join(sub): fh.to_json() for sub, fh in r.fibers.items()
                }
            rows.append(row)
        return {"set": self.set_name, "p": self.p, "rows": rows}


@dataclass(frozen=True)
class AsymptoticEstimate:
    d: int
    mu: Fraction
    residue: int = 0
    modulus: int = 1

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError("measure must be positive")
        if not 0 <= self.residue < self.modulus:
            raise DomainError("residue must lie in [0, modulus)")


@dataclass(frozen=True)
class PeriodReport:
    modulus: int
    classes: dict            # residue -> AsymptoticEstimate


# -- counting and sampling ----------------------------------------------------

def count_points(dset: DefinableSet, spec: FieldSpec, *, jobs: int = 1,
                 max_evals: int = DEFAULT_MAX_EVALS) -> int:
    """Number of assignments of the free variables satisfying the formula."""
    return enumeration.count_points_vec(dset, spec, jobs=jobs, max_evals=max_evals)


def collect_points(dset: DefinableSet, spec: FieldSpec, *, jobs: int = 1,
                   max_evals: int = DEFAULT_MAX_EVALS) -> np.ndarray:
    return enumeration.collect_points_vec(dset, spec, jobs=jobs, max_evals=max_evals)


def _subset_columns(dset, I):
    I = list(I)
    unknown = [v for v in I if v not in dset.free_vars]
    if unknown:
        raise DomainError(f"{unknown[0]!r} is not a free variable of {dset.name}")
    if len(set(I)) != len(I):
        raise DomainError("projection variables must be distinct")
    return [j for j, v in enumerate(dset.free_vars) if v in set(I)]


def _projection_keys(points: np.ndarray, cols, q: int) -> np.ndarray:
    key = points[cols[0]].astype(np.int64, copy=True)
    for c in cols[1:]:
        key *= q
        key += points[c]
    return key


def _histogram_from_points(points, cols, subset_labels, q):
    total = int(points.shape[1])
    if not cols:
        buckets = {total: 1} if total else {}
        return FiberHistogram(tuple(subset_labels), total, buckets, 1 if not total else 0)
    if q ** len(cols) >= 2**62:
        raise DomainError("projection space too large to key")
    keys = _projection_keys(points, cols, q)
    _, counts = np.unique(keys, return_counts=True)
    sizes, mult = np.unique(counts, return_counts=True)
    buckets = {int(s): int(n) for s, n in zip(sizes, mult)}
    outside = q ** len(cols) - int(counts.shape[0])
    return FiberHistogram(tuple(subset_labels), total, buckets, outside)


def fiber_histogram(dset: DefinableSet, I, spec: FieldSpec, *, jobs: int = 1,
                    max_evals: int = DEFAULT_MAX_EVALS) -> FiberHistogram:
    """Exact fiber-size census of the projection of X(G) onto the variables I."""
    cols = _subset_columns(dset, I)
    labels = [v for v in dset.free_vars if v in set(I)]
    points = collect_points(dset, spec, jobs=jobs, max_evals=max_evals)
    return _histogram_from_points(points, cols, labels, spec.q)


def _entropy_from_buckets(buckets: dict, total: int) -> LogValue:
    h = log_of_rat(total)
    for s, n in buckets.items():
        if s > 1:
            h = h - log_of_rat(s).scale(Fraction(n * s, total))
    return h


def entropy_profile(dset: DefinableSet, spec: FieldSpec, *, jobs: int = 1,
                    max_evals: int = DEFAULT_MAX_EVALS) -> Profile:
    """Exact entropy profile of the uniform distribution on X(G).

    One enumeration pass collects the points; each of the 2^n marginals is
    then a grouping of the point list by its projection.
    """
    points = collect_points(dset, spec, jobs=jobs, max_evals=max_evals)
    total = int(points.shape[1])
    if total == 0:
        raise DomainError(f"empty definable set: {dset.name} over {spec!r}")
    n = len(dset.free_vars)
    entries = {frozenset(): LogValue.zero()}
    for mask in range(1, 1 << n):
        labels = [dset.free_vars[j] for j in range(n) if mask >> j & 1]
        cols = [j for j in range(n) if mask >> j & 1]
        fh = _histogram_from_points(points, cols, labels, spec.q)
        entries[frozenset(labels)] = _entropy_from_buckets(fh.buckets, total)
    return Profile(dset.free_vars, entries)


def marginal_distribution(dset: DefinableSet, I, spec: FieldSpec, *, jobs: int = 1,
                          max_evals: int = DEFAULT_MAX_EVALS) -> Distribution:
    """The marginal of the uniform distribution on X(G) on the variables I."""
    cols = _subset_columns(dset, I)
    labels = [v for v in dset.free_vars if v in set(I)]
    points = collect_points(dset, spec, jobs=jobs, max_evals=max_evals)
    total = int(points.shape[1])
    if total == 0:
        raise DomainError(f"empty definable set: {dset.name} over {spec!r}")
    if not cols:
        return Distribution((), {(): Fraction(1)}, {})
    keys, counts = np.unique(_projection_keys(points, cols, spec.q), return_counts=True)
    probs = {}
    for key, c in zip(keys.tolist(), counts.tolist()):
        outcome = []
        for _ in cols:
            outcome.append(int(key % spec.q))
            key //= spec.q
        probs[tuple(reversed(outcome))] = Fraction(int(c), total)
    alphabets = {v: tuple(range(spec.q)) for v in labels}
    return Distribution(tuple(labels), probs, alphabets)


def tower_census(dset: DefinableSet, p: int, e_max: int, subsets=None, *,
                 jobs: int = 1, max_evals: int = DEFAULT_MAX_EVALS) -> CensusTable:
    """Counts (and optional per-subset fiber histograms) for e = 1..e_max."""
    if e_max < 1:
        raise DomainError("e_max must be >= 1")
    rows = []
    for e in range(1, e_max + 1):
        spec = field(p, e)
        if subsets:
            points = collect_points(dset, spec, jobs=jobs, max_evals=max_evals)
            fibers = {}
            for sub in subsets:
                cols = _subset_columns(dset, sub)
                labels = tuple(v for v in dset.free_vars if v in set(sub))
                fibers[labels] = _histogram_from_points(points, cols, labels, spec.q)
            count = int(points.shape[1])
            rows.append(CensusRow(e, spec.q, count, fibers))
        else:
            count = count_points(dset, spec, jobs=jobs, max_evals=max_evals)
            rows.append(CensusRow(e, spec.q, count))
    return CensusTable(dset.name, p, tuple(rows))


# -- growth-law recovery ---------------------------------------------------------

def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Smallest-denominator rational in [lo, hi], 0 < lo <= hi."""
    if lo > hi:
        raise ValueError("empty interval")
    n = lo.numerator // lo.denominator  # floor
    if Fraction(n + 1) <= hi or lo == n:
        return Fraction(n if lo == n else n + 1)
    return n + 1 / _simplest_between(1 / (hi - n), 1 / (lo - n))


def _row_qc(row):
    if isinstance(row, CensusRow):
        return row.q, row.count
    q, c = row
    return int(q), int(c)


def estimate_dim_measure(rows, *, residue: int = 0, modulus: int = 1,
                         denom_cap: int = DEFAULT_DENOM_CAP,
                         consistency: int = DEFAULT_CONSISTENCY) -> AsymptoticEstimate:
    """Recover (d, mu) with count ~ mu * q^d from two or more census rows.

    The dimension comes from the count ratio of the two largest rows; the
    measure is the smallest-denominator rational within the relative window
    1/sqrt(q2) of count/q^d, rejected if its denominator exceeds the cap or
    if it violates |x - mu| <= mu * consistency / sqrt(q2).
    """
    data = sorted((_row_qc(r) for r in rows), key=lambda t: t[0])
    if len(data) < 2:
        raise EstimationError("need at least two rows", rows=data)
    (q1, c1), (q2, c2) = data[-2], data[-1]
    if c1 <= 0 or c2 <= 0:
        raise EstimationError("zero counts cannot be fit", rows=data)
    if q1 == q2:
        raise EstimationError("rows must have distinct field sizes", rows=data)
    d = round(math.log(c2 / c1) / math.log(q2 / q1))
    if d < 0:
        raise EstimationError("counts decrease with the field size", rows=data)
    x = Fraction(c2, q2**d)
    s = max(math.isqrt(q2), 2)
    delta = x / s
    mu = _simplest_between(x - delta, x + delta)
    if mu <= 0 or mu.denominator > denom_cap:
        raise EstimationError(
            f"no measure with denominator <= {denom_cap} fits", estimate=x, rows=data
        )
    if (x - mu) ** 2 * q2 > (mu * consistency) ** 2:
        raise EstimationError(
            "count deviates from mu*q^d beyond the allowed error",
            mu=mu, estimate=x, rows=data,
        )
    return AsymptoticEstimate(d, mu, residue, modulus)


def detect_period(table: CensusTable, m_max: int, *,
                  denom_cap: int = DEFAULT_DENOM_CAP,
                  consistency: int = DEFAULT_CONSISTENCY) -> PeriodReport:
    """Smallest m with constant (d, mu) estimates in each class of e mod m.

    Estimates are computed from every adjacent pair of rows inside a class
    and must agree exactly; every class needs at least two rows for m to be
    a candidate.
    """
    rows = sorted(table.rows, key=lambda r: r.e)
    failures = {}
    for m in range(1, m_max + 1):
        classes: dict[int, list] = {}
        for r in rows:
            classes.setdefault(r.e % m, []).append(r)
        if any(len(rs) < 2 for rs in classes.values()):
            failures[m] = "a residue class has fewer than two rows"
            continue
        estimates = {}
        reason = None
        for res, rs in sorted(classes.items()):
            pair_estimates = []
            try:
                for a, b in zip(rs, rs[1:]):
                    pair_estimates.append(
                        estimate_dim_measure(
                            [a, b], residue=res, modulus=m,
                            denom_cap=denom_cap, consistency=consistency,
                        )
                    )
            except EstimationError as exc:
                reason = f"class {res}: {exc}"
                break
            dm = {(est.d, est.mu) for est in pair_estimates}
            if len(dm) != 1:
                reason = f"class {res}: estimates vary: {sorted(dm)}"
                break
            estimates[res] = pair_estimates[-1]
        if reason is None:
            return PeriodReport(m, estimates)
        failures[m] = reason
    raise EstimationError(
        f"period undetected up to m_max={m_max}", failures=failures
    )
