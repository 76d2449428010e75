import itertools
from collections import Counter
from fractions import Fraction

import pytest

from defent import (
    BudgetError,
    CensusRow,
    DomainError,
    EstimationError,
    LogValue,
    count_points,
    detect_period,
    entropy_profile,
    estimate_dim_measure,
    eval_formula,
    fiber_histogram,
    field,
    is_polymatroid,
    log_of_rat,
    marginal_distribution,
    parse_set,
    tower_census,
)
from defent.census import CensusTable
from defent.polymatroid import Profile


# -- an independent oracle: scalar evaluation + full joint table --------------

def oracle_count(dset, spec):
    n = len(dset.free_vars)
    total = 0
    for a in itertools.product(spec.elements(), repeat=n):
        if eval_formula(dset.formula, dict(zip(dset.free_vars, a)), spec):
            total += 1
    return total


def oracle_profile(dset, spec):
    """Materialize the joint table and sum -p log p per subset."""
    n = len(dset.free_vars)
    support = [
        a
        for a in itertools.product(spec.elements(), repeat=n)
        if eval_formula(dset.formula, dict(zip(dset.free_vars, a)), spec)
    ]
    T = len(support)
    entries = {}
    for r in range(n + 1):
        for comb in itertools.combinations(range(n), r):
            counts = Counter(tuple(a[i] for i in comb) for a in support)
            h = LogValue.zero()
            for c in counts.values():
                p = Fraction(c, T)
                h = h + log_of_rat(1 / p).scale(p)
            entries[frozenset(dset.free_vars[i] for i in comb)] = h
    return Profile(dset.free_vars, entries)


def test_count_examples(hyp_set, sqrt_set, kr_set):
    assert count_points(hyp_set, field(5)) == 9
    assert count_points(sqrt_set, field(7)) == 1
    assert count_points(sqrt_set, field(7, 2)) == 49
    q = 5
    assert count_points(kr_set, field(5)) == q**3 * (q - 1) ** 2


def test_count_matches_oracle_small():
    F = field(3)
    sets = [
        "set A(x, y) := x*y = 0",
        "set B(x, y) := exists t. t^2 = x*y",
        "set C(x, y, z) := x + y + z = 0 /\\ x != y",
        "set D(x) := forall t. t*x = 0 -> x = 0",
        "set E(x, y) := (x = 0 -> y = 0) /\\ x^2 + y != 2",
        "set F(x, y, z) := exists u. forall v. v*(x + u) != y - z \\/ v = 0",
    ]
    for text in sets:
        d = parse_set(text)
        for spec in (field(2), field(3), field(2, 2), field(5), field(3, 2)):
            assert count_points(d, spec) == oracle_count(d, spec), (text, spec)


def test_count_matches_oracle_nested_quantifiers():
    sets = [
        "set F(x, y, z) := exists u. forall v. v*(x + u) != y - z \\/ v = 0",
        "set G(x) := forall t. t*x = 0 -> x = 0",
        "set H(x, y) := exists u. u^2 = x /\\ (forall w. w*u = y -> w != x)",
        "set J(x) := exists a. exists b. a*b = x /\\ a != b",
        "set K(x, y) := exists u. x*u^2 + y*u = 1 \\/ (u = y /\\ x = 0)",
    ]
    for text in sets:
        d = parse_set(text)
        for spec in (field(2), field(3), field(2, 2), field(3, 2)):
            assert count_points(d, spec) == oracle_count(d, spec), (text, spec)


def test_fiber_histogram_examples(hyp_set, cubic_set):
    fh = fiber_histogram(hyp_set, ["y"], field(5))
    assert fh.buckets == {5: 1, 1: 4} and fh.total == 9 and fh.outside == 0
    fh2 = fiber_histogram(cubic_set, ["a", "b", "c"], field(2))
    assert fh2.buckets == {2: 2, 1: 4} and fh2.outside == 2
    fh3 = fiber_histogram(hyp_set, ["x", "y"], field(5))
    assert fh3.buckets == {1: 9}


def test_fiber_histogram_empty_projection(hyp_set):
    fh = fiber_histogram(hyp_set, [], field(3))
    assert fh.buckets == {5: 1} and fh.outside == 0


def test_fiber_histogram_bad_subset(hyp_set):
    with pytest.raises(DomainError):
        fiber_histogram(hyp_set, ["nope"], field(3))


def test_entropy_profile_examples(hyp_set):
    prof = entropy_profile(hyp_set, field(5))
    assert prof[("x", "y")] == log_of_rat(9)
    assert prof["y"] == LogValue({3: 2, 5: Fraction(-5, 9)})
    assert prof[()] == LogValue.zero()
    assert is_polymatroid(prof)


def test_entropy_profile_empty_set_errors():
    d = parse_set("set Empty(x) := x != x + 1 /\\ x = x + 1")
    with pytest.raises(DomainError, match="empty"):
        entropy_profile(d, field(3))


def test_profile_matches_oracle():
    for text, specs in [
        ("set A(x, y) := x*y = 0", [field(3), field(2, 2), field(7)]),
        ("set B(x, y, z) := x*y = z^2", [field(3), field(5)]),
        ("set C(x, y) := exists t. x = t^2 /\\ y != t", [field(5), field(3, 2)]),
    ]:
        d = parse_set(text)
        for spec in specs:
            assert entropy_profile(d, spec) == oracle_profile(d, spec), (text, spec)


def test_marginal_distribution_examples(hyp_set):
    m = marginal_distribution(hyp_set, ["y"], field(5))
    assert m.probs[(0,)] == Fraction(5, 9)
    assert all(m.probs[(y,)] == Fraction(1, 9) for y in range(1, 5))
    assert sum(m.probs.values()) == 1
    full = marginal_distribution(hyp_set, ["x", "y"], field(5))
    assert set(full.probs.values()) == {Fraction(1, 9)}
    empty = marginal_distribution(hyp_set, [], field(5))
    assert empty.probs == {(): Fraction(1)}


def test_tower_census_examples(hyp_set, sqrt_set, cubic_proj_set):
    t = tower_census(sqrt_set, 7, 4)
    assert [r.count for r in t.rows] == [1, 49, 1, 2401]
    assert [r.q for r in t.rows] == [7, 49, 343, 2401]
    t2 = tower_census(hyp_set, 5, 2)
    assert [r.count for r in t2.rows] == [9, 49]
    # independent double loop over (a, b, c) then x
    spec = field(5)
    brute = 0
    for a, b, c in itertools.product(range(5), repeat=3):
        if any((x**3 + a * x**2 + b * x + c) % 5 == 0 for x in range(5)):
            brute += 1
    t3 = tower_census(cubic_proj_set, 5, 1)
    assert t3.rows[0].count == brute


def test_tower_census_with_fibers(hyp_set):
    t = tower_census(hyp_set, 3, 2, subsets=[["y"]])
    fh = t.rows[0].fibers[("y",)]
    assert fh.buckets == {3: 1, 1: 2}


def test_estimate_examples():
    est = estimate_dim_measure([CensusRow(1, 5, 9), CensusRow(2, 25, 49)])
    assert (est.d, est.mu) == (1, 2)
    est2 = estimate_dim_measure([CensusRow(2, 49, 49), CensusRow(4, 2401, 2401)])
    assert (est2.d, est2.mu) == (1, 1)
    est3 = estimate_dim_measure([CensusRow(1, 7, 1), CensusRow(3, 343, 1)])
    assert (est3.d, est3.mu) == (0, 1)
    # plain (q, count) pairs work too
    est4 = estimate_dim_measure([(7, 231), (49, 78449)])
    assert (est4.d, est4.mu) == (3, Fraction(2, 3))


def test_estimate_errors():
    with pytest.raises(EstimationError):
        estimate_dim_measure([(5, 9)])
    with pytest.raises(EstimationError):
        estimate_dim_measure([(5, 0), (25, 0)])
    with pytest.raises(EstimationError):
        estimate_dim_measure([(5, 100), (25, 1)])  # shrinking counts
    with pytest.raises(EstimationError):
        # way off any mu * q^d law at the allowed consistency
        estimate_dim_measure([(101, 303), (103, 5 * 103)])


def test_detect_period_examples(hyp_set, sqrt_set, cubic_proj_set):
    rep = detect_period(tower_census(sqrt_set, 7, 6), 6)
    assert rep.modulus == 2
    assert (rep.classes[1].d, rep.classes[1].mu) == (0, 1)
    assert (rep.classes[0].d, rep.classes[0].mu) == (1, 1)
    rep2 = detect_period(tower_census(hyp_set, 3, 4), 4)
    assert rep2.modulus == 1
    assert (rep2.classes[0].d, rep2.classes[0].mu) == (1, 2)
    rep3 = detect_period(tower_census(cubic_proj_set, 7, 2), 2)
    assert rep3.modulus == 1
    assert rep3.classes[0].mu == Fraction(2, 3)


def test_detect_period_undetected():
    # the (2,3) pair shrinks a hundredfold, so m=1 errors out, and m=2
    # leaves the even class with a single row
    rows = tuple(CensusRow(e, 3**e, c) for e, c in [(1, 10), (2, 1000), (3, 10)])
    with pytest.raises(EstimationError, match="period undetected"):
        detect_period(CensusTable("bogus", 3, rows), 2)


def test_determinism_across_jobs(hyp_set, sqrt_set):
    a = tower_census(sqrt_set, 3, 4)
    b = tower_census(sqrt_set, 3, 4, jobs=2)
    assert a == b
    assert count_points(hyp_set, field(7), jobs=3) == 13


def test_budget_guard(kr_set):
    with pytest.raises(BudgetError):
        count_points(kr_set, field(5), max_evals=10**5)


def test_census_json(hyp_set):
    t = tower_census(hyp_set, 3, 2, subsets=[["y"]])
    obj = t.to_json()
    assert obj["set"] == "Hyp" and obj["p"] == 3
    assert obj["rows"][0]["count"] == 5
    assert obj["rows"][0]["fibers"]["y"]["buckets"] == {"1": 2, "3": 1}
