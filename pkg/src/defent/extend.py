"""Extension properties: conditional product, Slepian-Wolf, Ahlswede-Korner.

The conditional product glues a distribution to a relabeled copy of itself,
independent given the common restriction; it works on explicit rational
distributions and therefore produces exact entropy profiles.  The two
one-point extensions pin some entries of the extended profile and record
the remaining relations as linear constraints; a PartialProfile carries
pinned entries and constraints side by side, and check_extension verifies
a proposed completion exactly.

Constraints are pure linear functionals of the extended profile (constants
are eliminated by rewriting values of the base profile as entries of the
extension, which restricts to the base), so they serialize losslessly into
the functional DSL.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import DomainError
from .logval import LogValue, log_of_rat
from .polymatroid import (
    LinFunctional,
    Profile,
    cond_entropy_functional,
    eval_functional,
    is_polymatroid,
)

_ZERO = LogValue.zero()


class Distribution:
    """A jointly distributed tuple with exact positive rational probabilities.

    Only the support is stored; probabilities must sum to exactly 1.
    """

    def __init__(self, ground_set, probs, alphabets=None):
        self.ground_set = tuple(ground_set)
        n = len(self.ground_set)
        canon = {}
        total = Fraction(0)
        for outcome, pr in probs.items():
            outcome = tuple(outcome)
            if len(outcome) != n:
                raise DomainError(f"outcome {outcome} has wrong arity")
            pr = Fraction(pr)
            if pr <= 0:
                raise DomainError("stored probabilities must be positive")
            if outcome in canon:
                raise DomainError(f"duplicate outcome {outcome}")
            canon[outcome] = pr
            total += pr
        if total != 1:
            raise DomainError(f"probabilities sum to {total}, not 1")
        self.probs = canon
        if alphabets is None:
            alphabets = {
                v: tuple(sorted({o[i] for o in canon}, key=repr))
                for i, v in enumerate(self.ground_set)
            }
        self.alphabets = {v: tuple(vals) for v, vals in alphabets.items()}
        for i, v in enumerate(self.ground_set):
            seen = {o[i] for o in canon}
            if not seen <= set(self.alphabets.get(v, ())):
                raise DomainError(f"outcomes of {v!r} leave its alphabet")

    def __eq__(self, other):
        return (
            isinstance(other, Distribution)
            and self.ground_set == other.ground_set
            and self.probs == other.probs
        )

    def __repr__(self):
        return f"Distribution(n={len(self.ground_set)}, support={len(self.probs)})"

    def marginal(self, I) -> dict:
        """Map from projected outcomes on I (in ground-set order) to probability."""
        idx = [i for i, v in enumerate(self.ground_set) if v in set(I)]
        out: dict[tuple, Fraction] = {}
        for o, pr in self.probs.items():
            key = tuple(o[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + pr
        return out

    def to_json(self) -> dict:
        return {
            "ground_set": list(self.ground_set),
            "alphabets": {v: [str(a) for a in vals] for v, vals in self.alphabets.items()},
            "support": [
                {
                    "outcome": [str(x) for x in o],
                    "prob": f"{pr.numerator}/{pr.denominator}",
                }
                for o, pr in sorted(self.probs.items(), key=lambda kv: repr(kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "Distribution":
        def parse_val(s):
            return int(s) if isinstance(s, str) and s.lstrip("-").isdigit() else s

        gs = tuple(obj["ground_set"])
        probs = {
            tuple(parse_val(x) for x in row["outcome"]): Fraction(row["prob"])
            for row in obj["support"]
        }
        alphabets = {
            v: tuple(parse_val(x) for x in vals)
            for v, vals in obj.get("alphabets", {}).items()
        } or None
        return cls(gs, probs, alphabets)


def dist_entropy_profile(p: Distribution) -> Profile:
    """Exact entropy profile of a rational distribution."""
    gs = p.ground_set
    entries = {frozenset(): _ZERO}
    for r in range(1, len(gs) + 1):
        for comb in itertools.combinations(gs, r):
            h = _ZERO
            for pr in p.marginal(comb).values():
                h = h + log_of_rat(1 / pr).scale(pr)
            entries[frozenset(comb)] = h
    return Profile(gs, entries)


# -- conditional product (the copy construction) -----------------------------------

@dataclass(frozen=True)
class CopyResult:
    dist: Distribution
    tau: dict          # label of the extension -> label of the original
    shared: tuple      # L, the coordinates the two halves have in common

    @property
    def copy_labels(self):
        return tuple(v for v in self.dist.ground_set if self.tau.get(v, v) != v)


def _primed(v: str) -> str:
    return v + "'"


def copy_product(p: Distribution, L) -> CopyResult:
    """Glue p to a primed copy, independent given the shared coordinates L.

    The output lives on N together with primed copies of N - L; for
    outcomes whose L-marginals agree the probability is
    p(u) * p(v) / p_L(u_L), and the resulting profile restricts to p's on
    both halves while h(N : N' | L) = 0 exactly.
    """
    L = tuple(L)
    n_set = set(p.ground_set)
    if not set(L) <= n_set:
        raise DomainError("L must be a subset of the ground set")
    copied = [v for v in p.ground_set if v not in set(L)]
    for v in copied:
        if _primed(v) in n_set:
            raise DomainError(f"label {_primed(v)!r} already taken")
    ground = p.ground_set + tuple(_primed(v) for v in copied)
    l_idx = [i for i, v in enumerate(p.ground_set) if v in set(L)]
    c_idx = [i for i, v in enumerate(p.ground_set) if v not in set(L)]
    marg = p.marginal(L)
    by_l: dict[tuple, list] = {}
    for o, pr in p.probs.items():
        by_l.setdefault(tuple(o[i] for i in l_idx), []).append((o, pr))
    probs = {}
    for lkey, group in by_l.items():
        pl = marg[lkey]
        for u, pu in group:
            for v, pv in group:
                outcome = u + tuple(v[i] for i in c_idx)
                probs[outcome] = pu * pv / pl
    alphabets = dict(p.alphabets)
    for v in copied:
        alphabets[_primed(v)] = p.alphabets[v]
    tau = {_primed(v): v for v in copied}
    tau.update({v: v for v in L})
    return CopyResult(Distribution(ground, probs, alphabets), tau, L)


# -- partial profiles -----------------------------------------------------------

@dataclass
class PartialProfile:
    """Pinned entries plus linear constraints on a profile over ground_set."""

    ground_set: tuple
    entries: dict                    # frozenset -> LogValue | None
    constraints: list = dc_field(default_factory=list)

    def __post_init__(self):
        full = frozenset(self.ground_set)
        canon = {}
        for r in range(len(self.ground_set) + 1):
            for comb in itertools.combinations(self.ground_set, r):
                canon[frozenset(comb)] = None
        for ks, val in self.entries.items():
            ks = frozenset((ks,)) if isinstance(ks, str) else frozenset(ks)
            if not ks <= full:
                raise DomainError(f"entry {sorted(ks)} outside the ground set")
            canon[ks] = val
        if canon[frozenset()] is None:
            canon[frozenset()] = _ZERO
        if canon[frozenset()] != _ZERO:
            raise DomainError("h(emptyset) must be 0")
        self.entries = canon

    def defined(self):
        return {ks: v for ks, v in self.entries.items() if v is not None}

    def subset_key(self, ks):
        order = {v: i for i, v in enumerate(self.ground_set)}
        return ",".join(sorted(ks, key=order.get))

    def to_json(self) -> dict:
        return {
            "ground_set": list(self.ground_set),
            "entries": {
                self.subset_key(ks): (None if v is None else v.to_json())
                for ks, v in sorted(
                    self.entries.items(), key=lambda kv: (len(kv[0]), self.subset_key(kv[0]))
                )
            },
            "constraints": [f.render() for f in self.constraints],
        }

    @classmethod
    def from_json(cls, obj) -> "PartialProfile":
        from .polymatroid import parse_functional

        entries = {}
        for key, val in obj["entries"].items():
            ks = frozenset(key.split(",")) if key else frozenset()
            entries[ks] = None if val is None else LogValue.from_json(val)
        return cls(
            tuple(obj["ground_set"]),
            entries,
            [parse_functional(s) for s in obj.get("constraints", [])],
        )


def _fresh_label(taken, z_label):
    if z_label in taken:
        raise DomainError(f"extension label {z_label!r} already in the ground set")
    return z_label


def slepian_wolf_partial(h: Profile, L, alpha: LogValue, *, z_label: str = "z") -> PartialProfile:
    """One-point extension pinning h(K u z) = min(alpha + h(K), h(I u K)).

    I = N - L; z is a function of I (the constraint h(z|I) = 0 is recorded).
    Entries pinned: everything inside N; K u {z} for K <= L; and S u {z}
    with h-value h(S) for S >= I, which is forced by h(z|I) = 0 together
    with monotonicity and submodularity in any polymatroidal completion.
    Mixed subsets stay undefined.
    """
    if not is_polymatroid(h):
        raise DomainError("h must be a polymatroid")
    if alpha.sign() < 0:
        raise DomainError("alpha must be >= 0")
    L = tuple(L)
    if not set(L) <= set(h.ground_set):
        raise DomainError("L must be a subset of the ground set")
    z = _fresh_label(set(h.ground_set), z_label)
    I = frozenset(h.ground_set) - set(L)
    ground = h.ground_set + (z,)
    entries: dict = {}
    for ks in h.subsets():
        entries[ks] = h[ks]
    for r in range(len(L) + 1):
        for comb in itertools.combinations(sorted(L), r):
            k_set = frozenset(comb)
            a = alpha + h[k_set]
            b = h[I | k_set]
            entries[k_set | {z}] = a if (a - b).sign() <= 0 else b
    for ks in h.subsets():
        if ks >= I:
            entries[ks | {z}] = h[ks]
    constraints = [cond_entropy_functional((z,), I)]
    return PartialProfile(ground, entries, constraints)


def ak_partial(h: Profile, L, *, z_label: str = "z") -> PartialProfile:
    """One-point extension with h(z|L) = 0 and h(K|z) = h(K|I) for K <= L.

    No z-entries are forced as single values; the 2^|L| + 1 relations are
    recorded as constraints.  Since the extension restricts to h on N, the
    base values h(K u I), h(I) are written as entries of the extension
    itself, keeping every constraint a pure linear functional.
    """
    if not is_polymatroid(h):
        raise DomainError("h must be a polymatroid")
    L = tuple(L)
    if not set(L) <= set(h.ground_set):
        raise DomainError("L must be a subset of the ground set")
    z = _fresh_label(set(h.ground_set), z_label)
    I = frozenset(h.ground_set) - set(L)
    ground = h.ground_set + (z,)
    entries = {ks: h[ks] for ks in h.subsets()}
    constraints = [cond_entropy_functional((z,), L)]
    for r in range(len(L) + 1):
        for comb in itertools.combinations(sorted(L), r):
            k_set = frozenset(comb)
            constraints.append(
                cond_entropy_functional(k_set, (z,)) - cond_entropy_functional(k_set, I)
            )
    return PartialProfile(ground, entries, constraints)


def ak_canonical_witness(h: Profile, L, *, z_label: str = "z") -> Profile:
    """A concrete completion satisfying all ak_partial constraints.

    h(z) = h(L) - (h(N) - h(I)) and
    h(S u z) = max(h(z) + h((S n L) u I) - h(I), h(S)).
    Feasibility (not uniqueness): every recorded constraint holds for any
    polymatroid h by submodularity at the pair (L, K u I).
    """
    L = tuple(L)
    z = _fresh_label(set(h.ground_set), z_label)
    I = frozenset(h.ground_set) - set(L)
    full = frozenset(h.ground_set)
    c = h[frozenset(L)] + h[I] - h[full]
    entries = {}
    for ks in h.subsets():
        entries[ks] = h[ks]
        lifted = c + h[(ks & frozenset(L)) | I] - h[I]
        entries[ks | {z}] = lifted if (lifted - h[ks]).sign() >= 0 else h[ks]
    return Profile(h.ground_set + (z,), entries)


def copy_partial(h: Profile, L, *, tau=None) -> PartialProfile:
    """The copy-lemma constraint set for extensions of h along L.

    Pins h on subsets of N and its pullback on subsets of the primed copy,
    and records h(N : N' | L) = 0.
    """
    L = tuple(L)
    if not set(L) <= set(h.ground_set):
        raise DomainError("L must be a subset of the ground set")
    copied = [v for v in h.ground_set if v not in set(L)]
    primed = {v: _primed(v) for v in copied}
    ground = h.ground_set + tuple(primed[v] for v in copied)
    entries = {ks: h[ks] for ks in h.subsets()}
    for ks in h.subsets():
        image = frozenset(primed.get(v, v) for v in ks)
        entries[image] = h[ks]
    n_set = frozenset(h.ground_set)
    n_copy = frozenset(L) | {primed[v] for v in copied}
    ci = (
        LinFunctional({n_set: Fraction(1)})
        + LinFunctional({n_copy: Fraction(1)})
        - LinFunctional({frozenset(ground): Fraction(1)})
        - LinFunctional({frozenset(L): Fraction(1)})
    )
    return PartialProfile(ground, entries, [ci])


@dataclass
class ExtensionCheck:
    ok: bool
    failure: str | None = None

    def __bool__(self):
        return self.ok


def check_extension(pp: PartialProfile, candidate: Profile, *,
                    require_polymatroid: bool = True) -> ExtensionCheck:
    """Does the candidate match every pinned entry and constraint exactly?

    By default the candidate must also be a polymatroid; pass
    require_polymatroid=False for a pure feasibility check of the linear
    system (the AK canonical witness is only guaranteed feasible).  The
    first failure is reported by name.
    """
    if set(candidate.ground_set) != set(pp.ground_set):
        raise DomainError("candidate ground set differs from the partial profile's")
    for ks, val in pp.entries.items():
        if val is not None and candidate[ks] != val:
            return ExtensionCheck(False, f"entry {{{pp.subset_key(ks)}}} does not match")
    for j, f in enumerate(pp.constraints):
        if eval_functional(f, candidate).sign() != 0:
            return ExtensionCheck(False, f"constraint #{j} ({f.render()}) violated")
    if require_polymatroid:
        pm = is_polymatroid(candidate)
        if not pm:
            return ExtensionCheck(False, f"not a polymatroid: {pm.violation}")
    return ExtensionCheck(True)
