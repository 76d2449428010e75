"""Set functions on a finite ground set and the information-inequality algebra.

A Profile is a dense map 2^N -> LogValue with h(emptyset) = 0; entropy
profiles of uniform distributions on definable sets, linear-congruence
profiles and distribution profiles all live here.  On top of profiles the
module provides the classical functionals (conditional entropy, conditional
mutual information, the Ingleton expression), the elemental Shannon check,
factoring along a partition of the ground set, modular convolution, a small
text DSL for linear functionals, and the closed-form family attached to the
Kaced-Romashchenko configuration together with its essential-conditionality
scan.

All checks are exact: a functional is zero iff its LogValue is structurally
zero, and comparisons use certified signs, never floating thresholds.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import DomainError
from .gf import prime_power
from .logval import LOG2, Approx, LogValue, log_of_rat

_ZERO = LogValue.zero()


def _as_labelset(labels):
    if isinstance(labels, str):
        return frozenset((labels,))
    return frozenset(labels)


class Profile:
    """A set function on 2^N with exact LogValue entries and h(empty) = 0."""

    def __init__(self, ground_set, entries):
        self.ground_set = tuple(ground_set)
        if len(set(self.ground_set)) != len(self.ground_set):
            raise DomainError("ground set labels must be distinct")
        full = frozenset(self.ground_set)
        canon: dict[frozenset, LogValue] = {}
        for key, val in entries.items():
            ks = _as_labelset(key)
            if not ks <= full:
                raise DomainError(f"entry {set(ks)} not within ground set {self.ground_set}")
            if not isinstance(val, LogValue):
                raise DomainError("profile entries must be LogValue")
            canon[ks] = val
        expected = 1 << len(self.ground_set)
        if len(canon) != expected:
            raise DomainError(
                f"profile must define all {expected} subsets, got {len(canon)}"
            )
        if canon[frozenset()] != _ZERO:
            raise DomainError("h(emptyset) must be exactly 0")
        self._entries = canon

    def __getitem__(self, labels) -> LogValue:
        ks = _as_labelset(labels)
        try:
            return self._entries[ks]
        except KeyError:
            raise DomainError(f"unknown subset {sorted(ks)}") from None

    def subsets(self):
        return self._entries.keys()

    def entries(self):
        return dict(self._entries)

    def __eq__(self, other):
        return (
            isinstance(other, Profile)
            and set(self.ground_set) == set(other.ground_set)
            and self._entries == other._entries
        )

    def __repr__(self):
        return f"Profile(n={len(self.ground_set)}, labels={self.ground_set})"

    def subset_key(self, ks: frozenset) -> str:
        order = {v: i for i, v in enumerate(self.ground_set)}
        return ",".join(sorted(ks, key=order.get))

    def to_json(self) -> dict:
        return {
            "ground_set": list(self.ground_set),
            "entries": {
                self.subset_key(ks): val.to_json()
                for ks, val in sorted(
                    self._entries.items(), key=lambda kv: (len(kv[0]), self.subset_key(kv[0]))
                )
            },
        }

    @classmethod
    def from_json(cls, obj) -> "Profile":
        gs = tuple(obj["ground_set"])
        entries = {}
        for key, val in obj["entries"].items():
            ks = frozenset(key.split(",")) if key else frozenset()
            entries[ks] = LogValue.from_json(val)
        return cls(gs, entries)

    def normalized(self, base: int):
        """Base-b rendering of every entry: exact Fraction where possible."""
        return {ks: val.normalize_base(base) for ks, val in self._entries.items()}


def zero_profile(ground_set) -> Profile:
    gs = tuple(ground_set)
    entries = {}
    for r in range(len(gs) + 1):
        for comb in itertools.combinations(gs, r):
            entries[frozenset(comb)] = _ZERO
    return Profile(gs, entries)


# -- basic functionals -------------------------------------------------------

def cond_entropy(h: Profile, I, K) -> LogValue:
    """h(I|K) = h(I u K) - h(K)."""
    i, k = _as_labelset(I), _as_labelset(K)
    return h[i | k] - h[k]


def cond_mi(h: Profile, I, J, K=()) -> LogValue:
    """h(I:J|K) = h(I u K) + h(J u K) - h(I u J u K) - h(K)."""
    i, j, k = _as_labelset(I), _as_labelset(J), _as_labelset(K)
    return h[i | k] + h[j | k] - h[i | j | k] - h[k]


def ingleton(h: Profile, A, B, C, D) -> LogValue:
    """The Ingleton expression h(C:D|A) + h(C:D|B) + h(A:B) - h(C:D)."""
    return cond_mi(h, C, D, A) + cond_mi(h, C, D, B) + cond_mi(h, A, B) - cond_mi(h, C, D)


@dataclass
class PolymatroidCheck:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def is_polymatroid(h: Profile) -> PolymatroidCheck:
    """Elemental Shannon check: h(i|N-i) >= 0 and h(i:j|K) >= 0.

    The elemental inequalities are equivalent to the full monotonicity +
    submodularity system, at O(n^2 2^n) sign decisions.
    """
    gs = h.ground_set
    full = frozenset(gs)
    if h[frozenset()] != _ZERO:
        return PolymatroidCheck(False, "h(emptyset) != 0")
    for i in gs:
        if cond_entropy(h, (i,), full - {i}).sign() < 0:
            return PolymatroidCheck(False, f"h({i}|rest) < 0")
    for a, b in itertools.combinations(gs, 2):
        rest = [v for v in gs if v not in (a, b)]
        for r in range(len(rest) + 1):
            for kc in itertools.combinations(rest, r):
                if cond_mi(h, (a,), (b,), kc).sign() < 0:
                    return PolymatroidCheck(
                        False, f"h({a}:{b}|{','.join(kc) or 'empty'}) < 0"
                    )
    return PolymatroidCheck(True)


def factor(h: Profile, partition) -> Profile:
    """Pullback of h along a partition of its ground set into blocks."""
    blocks = {b: tuple(vs) for b, vs in dict(partition).items()}
    flat = [v for vs in blocks.values() for v in vs]
    if sorted(flat) != sorted(h.ground_set):
        raise DomainError("blocks must partition the ground set")
    entries = {}
    names = tuple(blocks)
    for r in range(len(names) + 1):
        for comb in itertools.combinations(names, r):
            union = frozenset(v for b in comb for v in blocks[b])
            entries[frozenset(comb)] = h[union]
    return Profile(names, entries)


def is_modular(m: Profile) -> bool:
    """m(I) + m(J) = m(I u J) + m(I n J) for all I, J, with m monotone, m(0)=0."""
    if m[frozenset()] != _ZERO:
        return False
    subs = list(m.subsets())
    for i in subs:
        for j in subs:
            if m[i] + m[j] != m[i | j] + m[i & j]:
                return False
    full = frozenset(m.ground_set)
    for i in subs:
        if cond_entropy(m, full, i).sign() < 0:
            return False
    return True


def convolve(h: Profile, m: Profile) -> Profile:
    """(h * m)(I) = min over J <= I of h(J) + m(I - J); m must be modular."""
    if set(h.ground_set) != set(m.ground_set):
        raise DomainError("convolution requires a common ground set")
    if not is_modular(m):
        raise DomainError("second argument of convolve must be modular")
    entries = {}
    for i_set in h.subsets():
        members = sorted(i_set)
        best = None
        for r in range(len(members) + 1):
            for comb in itertools.combinations(members, r):
                j_set = frozenset(comb)
                cand = h[j_set] + m[i_set - j_set]
                if best is None or cand < best:
                    best = cand
        entries[i_set] = best
    return Profile(h.ground_set, entries)


# -- linear functionals and their DSL ------------------------------------------

@dataclass
class LinFunctional:
    """Sparse rational combination of profile entries, plus a constant.

    The empty set never carries a coefficient (h(emptyset) = 0 identically);
    an affine term is held in ``const`` instead.
    """

    coeffs: dict = dc_field(default_factory=dict)
    const: LogValue = dc_field(default_factory=LogValue.zero)

    def __post_init__(self):
        canon = {}
        for ks, c in self.coeffs.items():
            ks = _as_labelset(ks)
            c = Fraction(c)
            if c and ks:
                canon[ks] = canon.get(ks, Fraction(0)) + c
        self.coeffs = {k: c for k, c in canon.items() if c}

    def __add__(self, other):
        out = dict(self.coeffs)
        for ks, c in other.coeffs.items():
            out[ks] = out.get(ks, Fraction(0)) + c
        return LinFunctional(out, self.const + other.const)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "LinFunctional":
        c = Fraction(c)
        return LinFunctional(
            {ks: c * v for ks, v in self.coeffs.items()}, self.const.scale(c)
        )

    def evaluate(self, h: Profile) -> LogValue:
        out = self.const
        for ks, c in self.coeffs.items():
            out = out + h[ks].scale(c)
        return out

    def render(self) -> str:
        """DSL text of the functional (raises if a constant term is present)."""
        if self.const != _ZERO:
            raise DomainError("constant term has no DSL rendering")
        if not self.coeffs:
            return "0"
        parts = []
        for ks, c in sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            mag = -c if c < 0 else c
            coef = "" if mag == 1 else f"{mag} "
            term = f"{coef}H({','.join(sorted(ks))})"
            if not parts:
                parts.append(("-" if c < 0 else "") + term)
            else:
                parts.append(("- " if c < 0 else "+ ") + term)
        return " ".join(parts)


def entropy_of(S) -> LinFunctional:
    return LinFunctional({_as_labelset(S): Fraction(1)})


def cond_entropy_functional(I, K) -> LinFunctional:
    i, k = _as_labelset(I), _as_labelset(K)
    return LinFunctional({i | k: Fraction(1)}) - LinFunctional({k: Fraction(1)})


def cond_mi_functional(I, J, K=()) -> LinFunctional:
    i, j, k = _as_labelset(I), _as_labelset(J), _as_labelset(K)
    return (
        LinFunctional({i | k: Fraction(1)})
        + LinFunctional({j | k: Fraction(1)})
        - LinFunctional({i | j | k: Fraction(1)})
        - LinFunctional({k: Fraction(1)})
    )


def ingleton_functional(A, B, C, D) -> LinFunctional:
    return (
        cond_mi_functional(C, D, A)
        + cond_mi_functional(C, D, B)
        + cond_mi_functional(A, B)
        - cond_mi_functional(C, D)
    )


_FUNC_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[()+\-:|,]))"
)


def parse_functional(text: str) -> LinFunctional:
    """Parse the functional DSL: rational-scaled sums of H, D, I, ING terms.

    Grammar: [sign] [rational] PRIM ( ("+"|"-") [rational] PRIM )* where
    PRIM is H(S), D(I|K), I(I:J[|K]) or ING(A:B|C:D) and S, I, J, K are
    comma-separated label lists.
    """
    toks = []
    pos = 0
    while pos < len(text):
        m = _FUNC_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise DomainError(f"bad functional syntax near {text[pos:pos+10]!r}")
            break
        toks.append(m.group().strip())
        pos = m.end()
    toks.append("")
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def labels(stop):
        out = []
        while peek() not in stop:
            name = take()
            if not re.fullmatch(r"[A-Za-z0-9_']+", name):
                raise DomainError(f"bad label {name!r} in functional")
            out.append(name)
            if peek() == ",":
                take()
        return tuple(out)

    def primitive():
        head = take()
        if take() != "(":
            raise DomainError(f"expected '(' after {head}")
        if head == "H":
            s = labels({")"})
            take()
            if not s:
                raise DomainError("H() needs at least one label")
            return entropy_of(s)
        if head == "D":
            I = labels({"|"})
            take()
            K = labels({")"})
            take()
            return cond_entropy_functional(I, K)
        if head == "I":
            I = labels({":"})
            take()
            J = labels({"|", ")"})
            if take() == ")":
                return cond_mi_functional(I, J)
            K = labels({")"})
            take()
            return cond_mi_functional(I, J, K)
        if head == "ING":
            A = labels({":"})
            take()
            B = labels({"|"})
            take()
            C = labels({":"})
            take()
            D = labels({")"})
            take()
            return ingleton_functional(A, B, C, D)
        raise DomainError(f"unknown functional primitive {head!r}")

    if toks[:2] == ["0", ""]:
        return LinFunctional()  # the zero functional renders and parses as "0"
    total = LinFunctional()
    first = True
    while peek():
        sign = Fraction(1)
        if peek() in "+-":
            sign = Fraction(-1) if take() == "-" else Fraction(1)
        elif not first:
            raise DomainError(f"expected '+' or '-', found {peek()!r}")
        coef = Fraction(1)
        if re.fullmatch(r"\d+(?:/\d+)?", peek() or " "):
            coef = Fraction(take())
        total = total + primitive().scale(sign * coef)
        first = False
    if first:
        raise DomainError("empty functional")
    return total


def eval_functional(f: LinFunctional, h: Profile) -> LogValue:
    full = frozenset(h.ground_set)
    for ks in f.coeffs:
        if not ks <= full:
            raise DomainError(f"functional uses labels {sorted(ks - full)} outside the profile")
    return f.evaluate(h)


# -- the Kaced-Romashchenko closed-form family -----------------------------------

@dataclass(frozen=True)
class KRClosedForm:
    q: int
    delta_ab: LogValue      # D(A:B)
    delta_ab_c: LogValue    # D(A:B|C)
    delta_cd_a: LogValue    # D(C:D|A)
    delta_cd_b: LogValue    # D(C:D|B)
    delta_cd: LogValue      # D(C:D)

    def as_dict(self):
        return {
            "D(A:B)": self.delta_ab,
            "D(A:B|C)": self.delta_ab_c,
            "D(C:D|A)": self.delta_cd_a,
            "D(C:D|B)": self.delta_cd_b,
            "D(C:D)": self.delta_cd,
        }


def _kr_q_check(q):
    pp = prime_power(q)
    if pp is None:
        raise DomainError(f"{q} is not a prime power")
    p, _ = pp
    if p == 2:
        raise DomainError("the KR configuration needs odd characteristic")
    if q < 5:
        raise DomainError("the KR closed forms need q >= 5")
    return pp


def kr_closed_form(q: int, *, corrected: bool = False) -> KRClosedForm:
    """The five functional values of the KR configuration at field size q.

    The classical derivation gives D(C:D|A) = D(C:D|B) = log(q-1) - log(q-2),
    which counts q tangent parabolas through a point where only q-1 exist
    (the leading coefficient ranges over the q-1 nonzero values).  Exact
    enumeration of the configuration yields log(q) - log(q-1) instead;
    pass corrected=True for the enumeration-exact family.  The other three
    values are the same under both readings.
    """
    _kr_q_check(q)
    d_ab = log_of_rat(Fraction(q, q - 1))
    d_cd_a = (
        log_of_rat(Fraction(q, q - 1))
        if corrected
        else log_of_rat(Fraction(q - 1, q - 2))
    )
    return KRClosedForm(
        q=q,
        delta_ab=d_ab,
        delta_ab_c=d_ab,
        delta_cd_a=d_cd_a,
        delta_cd_b=d_cd_a,
        delta_cd=d_ab + LOG2,
    )


def kr_violation(q: int, eps) -> LogValue:
    """D(A:B) + D(A:B|C) + eps * Ingleton(A:B|C:D) in its closed form:
    2 log(q/(q-1)) + eps (2 log((q-1)/(q-2)) - log 2).
    """
    eps = Fraction(eps)
    if eps < 0:
        raise DomainError("eps must be >= 0")
    _kr_q_check(q)
    main = log_of_rat(Fraction(q, q - 1)).scale(2)
    box = log_of_rat(Fraction(q - 1, q - 2)).scale(2) - LOG2
    return main + box.scale(eps)


def _odd_prime_powers(lo, hi):
    for q in range(max(lo, 3), hi + 1):
        pp = prime_power(q)
        if pp and pp[0] != 2:
            yield q


@dataclass(frozen=True)
class ThresholdScan:
    eps: Fraction
    q_star: int | None          # first q in range with negative value
    prev_q: int | None          # preceding prime power in the scanned range
    value_at_q_star: LogValue | None
    value_at_prev: LogValue | None

    @property
    def found(self):
        return self.q_star is not None


def scan_threshold(eps, q_max: int, q_min: int = 5) -> ThresholdScan:
    """Scan odd prime powers for the first negative kr_violation value.

    Also certifies the sign at the preceding prime power in the range.
    Finding no violation is reported, not an error.
    """
    if q_max < q_min:
        raise DomainError("empty scan range")
    eps = Fraction(eps)
    prev_q = None
    prev_val = None
    for q in _odd_prime_powers(q_min, q_max):
        val = kr_violation(q, eps)
        if val.sign() < 0:
            return ThresholdScan(eps, q, prev_q, val, prev_val)
        prev_q, prev_val = q, val
    return ThresholdScan(eps, None, prev_q, None, prev_val)


# -- DFZ parametric functional and the GMM conditional inequality ------------------

def dfz_family(s: int, *, corrected: bool = False, labels=("A", "B", "C", "D")) -> LinFunctional:
    """The parametric four-variable functional with coefficient (2^(s-1) - 1).

    As printed, one summand is I(B:C|C), which expands to the zero
    functional; corrected=True substitutes the plausible reading I(B:C|D).
    """
    if s < 2:
        raise DomainError("the family is defined for s >= 2")
    A, B, C, D = labels
    c1 = Fraction(2 ** (s - 1) - 1)
    w = Fraction(2 ** (s - 1) * (s - 1), 2**s - 2)
    third = cond_mi_functional(B, C, D if corrected else C)
    inner = (
        ingleton_functional(A, B, C, D)
        - cond_mi_functional(B, C, D)
        - cond_mi_functional(B, D, C)
        + cond_mi_functional(C, D, A).scale(1 / c1)
        + (
            cond_mi_functional(A, C, D)
            + cond_mi_functional(A, D, C)
            + third
            + cond_mi_functional(B, D, C)
        ).scale(w)
    )
    return inner.scale(c1)


@dataclass(frozen=True)
class GmmReport:
    antecedents: dict
    all_zero: bool
    ingleton_value: LogValue
    ingleton_sign: int | None   # only meaningful when all_zero


def gmm_check(h: Profile) -> GmmReport:
    """Evaluate the GMM conditional Ingleton inequality on a 4-block profile.

    The antecedents are I(A:C|D), I(A:D|C), I(B:C|D), I(B:D|C); when all
    vanish exactly, the report carries the certified sign of the Ingleton
    expression.  When some antecedent is nonzero nothing is concluded and
    all five values are reported (useful for essential-conditionality
    scans).  Block roles follow the ground-set order.
    """
    if len(h.ground_set) != 4:
        raise DomainError("gmm_check needs a profile on exactly 4 blocks")
    A, B, C, D = h.ground_set
    antecedents = {
        f"I({A}:{C}|{D})": cond_mi(h, A, C, D),
        f"I({A}:{D}|{C})": cond_mi(h, A, D, C),
        f"I({B}:{C}|{D})": cond_mi(h, B, C, D),
        f"I({B}:{D}|{C})": cond_mi(h, B, D, C),
    }
    box = ingleton(h, A, B, C, D)
    all_zero = all(v.is_zero() for v in antecedents.values())
    return GmmReport(antecedents, all_zero, box, box.sign() if all_zero else None)
