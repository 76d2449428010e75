"""Smith normal form over Z and entropy profiles of linear congruences.

For an integer matrix A and modulus m, the coordinates of a uniform random
element of the column span of A mod m form a quasi-uniform random vector:
every marginal is uniform on the image of the corresponding row submatrix,
so its entropy is exactly the log of an image size.  Image sizes come from
the Smith normal form S = T A U (T, U unimodular, diagonal s_1 | s_2 | ...):

    |im(A mod m)| = prod_i m / gcd(m, s_i),   with gcd(m, 0) = m.

The same machinery drives monomial (toric) maps: writing torus coordinates
as powers of a generator turns t -> (t^a_1, ..., t^a_n) into the Z/(q-1)
linear map x -> A x, so the toric profile must equal the congruence profile
at m = q - 1 (torus_profile computes it by direct enumeration instead,
which keeps the two routes independent).

SNF postconditions (S = T A U, |det T| = |det U| = 1, the divisibility
chain) are verified algebraically on every call.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from .errors import BudgetError, DomainError
from .extend import Distribution, dist_entropy_profile
from .gf import FieldSpec
from .logval import LogValue, is_prime, log_of_rat
from .polymatroid import Profile

DEFAULT_BRUTEFORCE_BUDGET = 10**8


@dataclass(frozen=True)
class IntMatrix:
    labels: tuple
    rows: tuple

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise DomainError("matrix dimensions must be positive")
        width = len(self.rows[0])
        if any(len(r) != width for r in self.rows):
            raise DomainError("ragged matrix")
        if len(self.labels) != len(self.rows):
            raise DomainError("one label per row required")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("row labels must be distinct")

    @property
    def n(self):
        return len(self.rows)

    @property
    def d(self):
        return len(self.rows[0])

    @classmethod
    def from_rows(cls, rows, labels=None) -> "IntMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if labels is None:
            labels = tuple(str(i + 1) for i in range(len(rows)))
        return cls(tuple(labels), rows)

    def submatrix(self, I) -> "IntMatrix":
        want = set(I)
        unknown = want - set(self.labels)
        if unknown:
            raise DomainError(f"unknown row label {sorted(unknown)[0]!r}")
        keep = [(lab, row) for lab, row in zip(self.labels, self.rows) if lab in want]
        if not keep:
            raise DomainError("empty row subset")
        return IntMatrix(tuple(l for l, _ in keep), tuple(r for _, r in keep))

    def to_json(self):
        return {"labels": list(self.labels), "rows": [list(r) for r in self.rows]}


def parse_matrix(text: str) -> IntMatrix:
    """Matrix text: one row per line, optional 'label:' prefix; or JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        return IntMatrix.from_rows(obj["rows"], tuple(obj["labels"]) if "labels" in obj else None)
    rows = []
    labels = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            lab, rest = line.split(":", 1)
            labels.append(lab.strip())
        else:
            rest = line
            labels.append(None)
        try:
            rows.append(tuple(int(tok) for tok in rest.split()))
        except ValueError:
            raise DomainError(f"bad matrix row: {line!r}") from None
    if not rows:
        raise DomainError("empty matrix")
    if any(l is None for l in labels):
        if any(l is not None for l in labels):
            raise DomainError("either label every row or none")
        labels = None
    return IntMatrix.from_rows(rows, tuple(labels) if labels else None)


# -- Smith normal form -------------------------------------------------------------

@dataclass(frozen=True)
class SnfResult:
    S: tuple
    T: tuple
    U: tuple

    @property
    def diagonal(self):
        k = min(len(self.S), len(self.S[0]))
        return tuple(self.S[i][i] for i in range(k))


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _matmul(A, B):
    n, k, d = len(A), len(B), len(B[0])
    out = [[0] * d for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                row = out[i]
                for j in range(d):
                    row[j] += a * Bt[j]
    return out


def _det(M):
    """Exact integer determinant (fraction-free Gaussian elimination)."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] * inv
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    assert det.denominator == 1
    return int(det)


def snf(matrix) -> SnfResult:
    """Smith normal form with unimodular transforms: S = T A U.

    gcd-driven row/column reduction with pivot normalization to a
    nonnegative diagonal; the divisibility chain is enforced by folding
    non-divisible entries of the trailing block into the pivot row.
    Postconditions are verified before returning.
    """
    A = matrix.rows if isinstance(matrix, IntMatrix) else tuple(matrix)
    n, d = len(A), len(A[0])
    S = [list(map(int, row)) for row in A]
    T = _identity(n)
    U = _identity(d)

    def row_add(i, j, c):
        S[i] = [x + c * y for x, y in zip(S[i], S[j])]
        T[i] = [x + c * y for x, y in zip(T[i], T[j])]

    def col_add(i, j, c):
        for r in range(n):
            S[r][i] += c * S[r][j]
        for r in range(d):
            U[r][i] += c * U[r][j]

    def row_swap(i, j):
        S[i], S[j] = S[j], S[i]
        T[i], T[j] = T[j], T[i]

    def col_swap(i, j):
        for r in range(n):
            S[r][i], S[r][j] = S[r][j], S[r][i]
        for r in range(d):
            U[r][i], U[r][j] = U[r][j], U[r][i]

    def row_negate(i):
        S[i] = [-x for x in S[i]]
        T[i] = [-x for x in T[i]]

    k = min(n, d)
    for t in range(k):
        # smallest nonzero entry of the trailing block becomes the pivot
        best = None
        for i in range(t, n):
            for j in range(t, d):
                if S[i][j] and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        if best[0] != t:
            row_swap(t, best[0])
        if best[1] != t:
            col_swap(t, best[1])
        while True:
            # clear column t and row t by division; remainders become pivots
            restart = False
            for i in range(t + 1, n):
                if S[i][t]:
                    q = S[i][t] // S[t][t]
                    row_add(i, t, -q)
                    if S[i][t]:
                        row_swap(t, i)
                        restart = True
            if restart:
                continue
            for j in range(t + 1, d):
                if S[t][j]:
                    q = S[t][j] // S[t][t]
                    col_add(j, t, -q)
                    if S[t][j]:
                        col_swap(t, j)
                        restart = True
            if restart:
                continue
            # fold in any trailing entry the pivot does not divide
            folded = False
            piv = S[t][t]
            for i in range(t + 1, n):
                if any(x % piv for x in S[i][t + 1:]):
                    row_add(t, i, 1)
                    folded = True
                    break
            if not folded:
                break
        if S[t][t] < 0:
            row_negate(t)

    result = SnfResult(
        tuple(tuple(r) for r in S), tuple(tuple(r) for r in T), tuple(tuple(r) for r in U)
    )
    _verify_snf(A, result)
    return result


def _verify_snf(A, res: SnfResult):
    n, d = len(A), len(A[0])
    S, T, U = res.S, res.T, res.U
    TA = _matmul([list(r) for r in T], [list(r) for r in A])
    TAU = _matmul(TA, [list(r) for r in U])
    if tuple(tuple(r) for r in TAU) != S:
        raise AssertionError("SNF postcondition S = T*A*U failed")
    if abs(_det(T)) != 1 or abs(_det(U)) != 1:
        raise AssertionError("SNF transforms are not unimodular")
    diag = res.diagonal
    for i in range(n):
        for j in range(d):
            if i != j and S[i][j]:
                raise AssertionError("SNF result is not diagonal")
    for i, s in enumerate(diag):
        if s < 0:
            raise AssertionError("SNF diagonal must be nonnegative")
        if i + 1 < len(diag) and s and diag[i + 1] % s:
            raise AssertionError("SNF divisibility chain broken")
        if i + 1 < len(diag) and s == 0 and diag[i + 1] != 0:
            raise AssertionError("SNF divisibility chain broken (zero before nonzero)")


# -- image sizes and profiles ----------------------------------------------------

_DIAG_CACHE: dict[tuple, tuple] = {}


def _snf_diagonal(rows: tuple) -> tuple:
    """Cached SNF diagonal; image sizes for many moduli share one reduction."""
    diag = _DIAG_CACHE.get(rows)
    if diag is None:
        diag = snf(rows).diagonal
        if len(_DIAG_CACHE) > 1 << 16:
            _DIAG_CACHE.clear()
        _DIAG_CACHE[rows] = diag
    return diag


def image_size(matrix: IntMatrix, m: int) -> int:
    """Order of the column span of A mod m inside (Z/m)^n, via SNF."""
    if m < 2:
        raise DomainError("modulus must be >= 2")
    out = 1
    for s in _snf_diagonal(matrix.rows):
        out *= m // gcd(m, s) if s else 1  # gcd(m, 0) = m
    return out


def image_size_bruteforce(matrix: IntMatrix, m: int, *,
                          budget: int = DEFAULT_BRUTEFORCE_BUDGET) -> int:
    """Independent oracle: enumerate all of (Z/m)^d and collect A x mod m."""
    if m < 2:
        raise DomainError("modulus must be >= 2")
    d = matrix.d
    total = m**d
    if total > budget:
        raise BudgetError(f"bruteforce needs {total} tuples (budget {budget})")
    A = np.array(matrix.rows, dtype=np.int64)
    seen = []
    chunk = 1 << 20
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        coords = np.empty((d, idx.shape[0]), dtype=np.int64)
        rem = idx
        for j in range(d):
            coords[j] = rem % m
            rem = rem // m
        vals = (A @ coords) % m
        key = vals[0].copy()
        for r in range(1, vals.shape[0]):
            key *= m
            key += vals[r]
        seen.append(np.unique(key))
    return int(np.unique(np.concatenate(seen)).shape[0])


def profile_lincong(matrix: IntMatrix, m: int) -> Profile:
    """Entropy profile of the uniform distribution on im(A mod m).

    h(I) = log |im(A_I mod m)| for every row subset I; quasi-uniformity
    makes each marginal exactly uniform on its image.
    """
    if m < 2:
        raise DomainError("modulus must be >= 2")
    entries = {frozenset(): LogValue.zero()}
    for r in range(1, matrix.n + 1):
        for comb in itertools.combinations(matrix.labels, r):
            entries[frozenset(comb)] = log_of_rat(image_size(matrix.submatrix(comb), m))
    return Profile(matrix.labels, entries)


def torus_profile(matrix: IntMatrix, spec: FieldSpec, *,
                  budget: int = DEFAULT_BRUTEFORCE_BUDGET) -> Profile:
    """Profile of the uniform distribution on the monomial image of the torus.

    Enumerates (F_q^x)^d directly and pushes through t -> (t^a_1, ..., t^a_n);
    equals profile_lincong(A, q-1) by the generator correspondence, but is
    computed without any Smith normal form.
    """
    m = spec.q - 1
    if m < 2:
        raise DomainError("torus profile needs q >= 3")
    d = matrix.d
    total = m**d
    if total > budget:
        raise BudgetError(f"torus enumeration needs {total} tuples (budget {budget})")
    image = set()
    nonzero = [a for a in spec.elements() if a != 0]
    for t in itertools.product(nonzero, repeat=d):
        image.add(
            tuple(
                _monomial(spec, t, row)
                for row in matrix.rows
            )
        )
    pr = Fraction(1, len(image))
    dist = Distribution(
        matrix.labels,
        {outcome: pr for outcome in image},
        {lab: tuple(spec.elements()) for lab in matrix.labels},
    )
    return dist_entropy_profile(dist)


def _monomial(spec, t, exponents):
    out = 1
    for tj, a in zip(t, exponents):
        if a:
            out = spec.mul(out, spec.pow(tj, a))
    return out


def dirichlet_modulus(matrix: IntMatrix) -> int:
    """lcm of all nonzero SNF diagonal entries over all row submatrices."""
    s = 1
    for r in range(1, matrix.n + 1):
        for comb in itertools.combinations(matrix.labels, r):
            for entry in _snf_diagonal(matrix.submatrix(comb).rows):
                if entry:
                    s = lcm(s, entry)
    return s


def suggest_primes(s: int, count: int) -> list:
    """The first primes p = 1 (mod s), ascending (Dirichlet guarantees enough)."""
    if s < 1 or count < 0:
        raise DomainError("need s >= 1 and count >= 0")
    out = []
    p = 2
    while len(out) < count:
        if p % s == 1 % s and is_prime(p):
            out.append(p)
        p += 1
    return out
