"""Vectorized point enumeration for definable sets over finite fields.

Assignments of the free variables are enumerated in canonical order (first
declared variable most significant, each variable running through the field
enumeration) and the formula is evaluated on numpy batches.  An element
batch is an integer array of base-p digits with shape (e, k); all field
arithmetic is digit-wise with reduction rows precomputed from the modulus.

Quantifiers iterate the field with blockwise short-circuit over the rows
still undecided, quantifier-free subtrees are hoisted out of the loop, and
a quantified atom that splits additively into an x-part and an x-free part
is resolved by match counting against the value multiset of the x-part.
These are evaluation-order devices only: results agree with the scalar
reference evaluator (ringlang.eval_formula) on every input.

The chunked drivers are deterministic for any worker count because partial
results are merged in chunk order and each chunk is a pure function of its
index range.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import ringlang as rl
from .errors import BudgetError
from .gf import FieldSpec, _pmul, _prem, _trim

DEFAULT_MAX_EVALS = 10**9
_CHUNK_ELEMS = 1 << 21

_ENGINES: dict = {}


class _HoistT:
    """Placeholder for a hoisted (quantifier-free) term value in the env."""

    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key


class _HoistF:
    """Placeholder for a hoisted (quantifier-free) formula value."""

    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key


def _tvars(t):
    if isinstance(t, (_HoistT,)):
        return set()
    if isinstance(t, rl.Var):
        return {t.name}
    if isinstance(t, rl.Const):
        return set()
    if isinstance(t, rl.Neg):
        return _tvars(t.arg)
    if isinstance(t, rl.Pow):
        return _tvars(t.base)
    out = set()
    for a in t.args:
        out |= _tvars(a)
    return out


def _fvars(phi):
    if isinstance(phi, _HoistF):
        return set()
    if isinstance(phi, rl.Eq0):
        return _tvars(phi.term)
    if isinstance(phi, rl.Not):
        return _fvars(phi.arg)
    if isinstance(phi, (rl.And, rl.Or, rl.Implies)):
        return _fvars(phi.lhs) | _fvars(phi.rhs)
    if isinstance(phi, (rl.Exists, rl.Forall)):
        return _fvars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def get_engine(spec: FieldSpec) -> "_Engine":
    eng = _ENGINES.get(spec)
    if eng is None:
        eng = _Engine(spec)
        _ENGINES[spec] = eng
    return eng


class _Engine:
    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p = spec.p
        self.e = spec.e
        self.q = spec.q
        # mul keeps intermediate sums below 2*e*p^2; pick dtype accordingly
        self.dtype = np.int32 if 2 * spec.e * spec.p * spec.p < 2**31 else np.int64
        if spec.e >= 2:
            rows = []
            cur = _prem([0] * spec.e + [1], list(spec.modulus), spec.p)  # x^e mod f
            for _ in range(spec.e - 1):
                padded = list(cur) + [0] * (spec.e - len(cur))
                rows.append(padded)
                cur = _prem(_pmul([0, 1], _trim(list(cur)), spec.p), list(spec.modulus), spec.p)
            self.reduc = np.array(rows, dtype=self.dtype)  # (e-1, e)
        self._consts: dict[int, np.ndarray] = {}
        self._all_elems = None

    # -- digit codec ----------------------------------------------------------

    def decode(self, idx) -> np.ndarray:
        """Element indices -> digit array (e, k)."""
        idx = np.asarray(idx)
        out = np.empty((self.e, idx.shape[0]), dtype=self.dtype)
        rem = idx
        for i in range(self.e):
            out[i] = rem % self.p
            if i + 1 < self.e:
                rem = rem // self.p
        return out

    def encode(self, dig) -> np.ndarray:
        out = dig[self.e - 1].astype(np.int64)
        for i in range(self.e - 2, -1, -1):
            out = out * self.p + dig[i]
        return out

    def const(self, value: int) -> np.ndarray:
        arr = self._consts.get(value)
        if arr is None:
            arr = np.zeros((self.e, 1), dtype=self.dtype)
            arr[0, 0] = value % self.p
            self._consts[value] = arr
        return arr

    def all_elements(self) -> np.ndarray:
        if self._all_elems is None:
            self._all_elems = self.decode(np.arange(self.q, dtype=np.int64))
        return self._all_elems

    # -- field arithmetic on digit arrays ------------------------------------

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (self.p - a) % self.p

    def mul(self, a, b):
        if self.e == 1:
            return (a * b) % self.p
        e = self.e
        conv = [None] * (2 * e - 1)
        for m in range(2 * e - 1):
            lo = max(0, m - e + 1)
            acc = None
            for i in range(lo, min(m, e - 1) + 1):
                prod = a[i] * b[m - i]
                acc = prod if acc is None else acc + prod
            conv[m] = acc
        out_shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        low = [np.broadcast_to(c, out_shape).copy() for c in conv[:e]]
        for j in range(e - 1):
            hi = conv[e + j] % self.p
            for i in range(e):
                r = int(self.reduc[j, i])
                if r:
                    low[i] = low[i] + hi * r
        return np.stack([c % self.p for c in low])

    def pow(self, a, n: int):
        result = None
        base = a
        while n:
            if n & 1:
                result = base if result is None else self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result if result is not None else self.const(1)

    def eq0(self, a):
        return (a == 0).all(axis=0)

    # -- term evaluation ----------------------------------------------------------

    def eval_term(self, t, env):
        if isinstance(t, _HoistT):
            return env[t.key]
        if isinstance(t, rl.Var):
            return env[t.name]
        if isinstance(t, rl.Const):
            return self.const(t.value)
        if isinstance(t, rl.Add):
            out = self.eval_term(t.args[0], env)
            for a in t.args[1:]:
                out = self.add(out, self.eval_term(a, env))
            return out
        if isinstance(t, rl.Mul):
            out = self.eval_term(t.args[0], env)
            for a in t.args[1:]:
                out = self.mul(out, self.eval_term(a, env))
            return out
        if isinstance(t, rl.Neg):
            return self.neg(self.eval_term(t.arg, env))
        if isinstance(t, rl.Pow):
            return self.pow(self.eval_term(t.base, env), t.exp)
        raise TypeError(f"not a term: {t!r}")

    # -- formula evaluation -----------------------------------------------------

    def eval_formula(self, phi, env, k: int) -> np.ndarray:
        if isinstance(phi, _HoistF):
            r = env[phi.key][0]
            return np.broadcast_to(r, (k,)) if r.shape[0] != k else r
        if isinstance(phi, rl.Eq0):
            r = self.eq0(self.eval_term(phi.term, env))
            return np.broadcast_to(r, (k,)) if r.shape[0] != k else r
        if isinstance(phi, rl.Not):
            return ~self.eval_formula(phi.arg, env, k)
        if isinstance(phi, rl.And):
            a = self.eval_formula(phi.lhs, env, k)
            return self._guarded(phi.rhs, env, k, a, combine="and")
        if isinstance(phi, rl.Or):
            a = self.eval_formula(phi.lhs, env, k)
            return self._guarded(phi.rhs, env, k, a, combine="or")
        if isinstance(phi, rl.Implies):
            a = self.eval_formula(phi.lhs, env, k)
            return self._guarded(phi.rhs, env, k, a, combine="implies")
        if isinstance(phi, (rl.Exists, rl.Forall)):
            return self._eval_quant(phi, env, k)
        raise TypeError(f"not a formula: {phi!r}")

    def _guarded(self, rhs, env, k, a, combine):
        """Evaluate rhs only on the rows where it can still matter."""
        # and: rhs matters where lhs holds; or: where it fails;
        # implies: where the antecedent holds
        active = ~a if combine == "or" else a
        na = int(active.sum())
        if combine == "and":
            base = np.zeros(k, dtype=bool)
        elif combine == "or":
            base = a.copy()
        else:  # implies: rows with lhs false are True
            base = ~a
        if na == 0:
            return base
        if na == k:
            r = self.eval_formula(rhs, env, k)
            if combine == "and":
                return a & r
            return base | r
        if na > 0.75 * k:
            r = self.eval_formula(rhs, env, k)
            if combine == "and":
                return a & r
            return base | (active & r)
        idx = np.flatnonzero(active)
        sub = {v: (arr if arr.shape[1] == 1 else arr[:, idx]) for v, arr in env.items()}
        r = self.eval_formula(rhs, sub, na)
        base[idx[r]] = True
        return base

    # -- quantifiers -----------------------------------------------------------------

    def _eval_quant(self, node, env, k):
        exists = isinstance(node, rl.Exists)
        x = node.var
        body = node.body
        if x not in _fvars(body):
            # the field is nonempty, so both quantifiers reduce to the body
            return self.eval_formula(body, env, k)
        fast = self._additive_counts(node, env, k)
        if fast is not None:
            return fast
        live = dict(env)
        body = self._hoist(body, x, live, k)
        result = np.zeros(k, dtype=bool) if exists else np.ones(k, dtype=bool)
        alive = np.arange(k)
        for xv in range(self.q):
            live[x] = self.decode(np.array([xv], dtype=np.int64))
            r = self.eval_formula(body, live, alive.shape[0])
            hit = r if exists else ~r
            nh = int(hit.sum())
            if nh:
                result[alive[hit]] = exists
                keep = ~hit
                alive = alive[keep]
                if alive.shape[0] == 0:
                    break
                for v, arr in live.items():
                    if v != x and arr.shape[1] != 1:
                        live[v] = arr[:, keep]
        return result

    def _hoist(self, node, x, env, k):
        """Replace maximal subtrees free of every pending quantifier variable.

        "Pending" means x itself plus any inner quantifier variable whose
        binder lies between the hoist point and the subtree; those have no
        value in env yet, so subtrees mentioning them must stay in place.
        """

        def store_term(t):
            key = f"\0t{len(env)}"
            env[key] = self.eval_term(t, env)
            return _HoistT(key)

        def store_formula(f):
            key = f"\0f{len(env)}"
            val = self.eval_formula(f, env, k)
            env[key] = val[None, :]
            return _HoistF(key)

        def walk_term(t, pending):
            if isinstance(t, (rl.Var, rl.Const, _HoistT)):
                return t
            if not (_tvars(t) & pending):
                return store_term(t)
            if isinstance(t, rl.Add):
                return rl.Add(tuple(walk_term(a, pending) for a in t.args))
            if isinstance(t, rl.Mul):
                return rl.Mul(tuple(walk_term(a, pending) for a in t.args))
            if isinstance(t, rl.Neg):
                return rl.Neg(walk_term(t.arg, pending))
            if isinstance(t, rl.Pow):
                return rl.Pow(walk_term(t.base, pending), t.exp)
            raise TypeError(f"not a term: {t!r}")

        def walk(f, pending):
            if isinstance(f, _HoistF):
                return f
            if not (_fvars(f) & pending):
                return store_formula(f)
            if isinstance(f, rl.Eq0):
                return rl.Eq0(walk_term(f.term, pending))
            if isinstance(f, rl.Not):
                return rl.Not(walk(f.arg, pending))
            if isinstance(f, rl.And):
                return rl.And(walk(f.lhs, pending), walk(f.rhs, pending))
            if isinstance(f, rl.Or):
                return rl.Or(walk(f.lhs, pending), walk(f.rhs, pending))
            if isinstance(f, rl.Implies):
                return rl.Implies(walk(f.lhs, pending), walk(f.rhs, pending))
            if isinstance(f, (rl.Exists, rl.Forall)):
                cls = type(f)
                return cls(f.var, walk(f.body, pending | {f.var}))
            raise TypeError(f"not a formula: {f!r}")

        return walk(node, {x})

    def _additive_counts(self, node, env, k):
        """Match-counting evaluation of a quantified additively split atom.

        Applies when the body is t = 0 or t != 0 and every summand of t
        involves either only the quantified variable or none of it.  The
        number of x in the field with x-part(x) = -(x-free part) decides
        all four quantifier/negation combinations at once.
        """
        exists = isinstance(node, rl.Exists)
        x = node.var
        body = node.body
        negated = False
        if isinstance(body, rl.Not):
            negated = True
            body = body.arg
        if not isinstance(body, rl.Eq0):
            return None
        xonly = []
        xfree = []
        for sign, summand in _summands(body.term):
            vs = _tvars(summand)
            if x in vs:
                if vs != {x}:
                    return None
                xonly.append((sign, summand))
            else:
                xfree.append((sign, summand))
        if not xonly:
            return None  # x-free body; handled by the caller

        xenv = {x: self.all_elements()}
        sval = self._signed_sum(xonly, xenv)  # (e, q)
        hval = self._signed_sum(xfree, env) if xfree else self.const(0)
        uniq, counts = np.unique(self.encode(sval), return_counts=True)
        target = self.encode(self.neg(hval))
        if target.shape[0] == 1:
            target = np.broadcast_to(target, (k,))
        pos = np.searchsorted(uniq, target)
        pos_c = np.minimum(pos, uniq.shape[0] - 1)
        valid = uniq[pos_c] == target
        cnt = np.where(valid, counts[pos_c], 0)
        if exists and not negated:
            return cnt >= 1
        if exists and negated:
            return cnt < self.q
        if not exists and not negated:
            return cnt == self.q
        return cnt == 0

    def _signed_sum(self, signed_terms, env):
        out = None
        for sign, t in signed_terms:
            v = self.eval_term(t, env)
            if sign < 0:
                v = self.neg(v)
            out = v if out is None else self.add(out, v)
        return out


def _summands(t, sign=1):
    if isinstance(t, rl.Add):
        for a in t.args:
            yield from _summands(a, sign)
    elif isinstance(t, rl.Neg):
        yield from _summands(t.arg, -sign)
    else:
        yield (sign, t)


# -- chunked drivers ---------------------------------------------------------------


def _chunk_rows(e: int) -> int:
    return max(1024, _CHUNK_ELEMS // e)


def _eval_chunk(dset, spec, lo, hi, collect):
    eng = get_engine(spec)
    n = len(dset.free_vars)
    q = spec.q
    idx = np.arange(lo, hi, dtype=np.int64)
    env = {}
    for j, v in enumerate(dset.free_vars):
        div = q ** (n - 1 - j)
        env[v] = eng.decode((idx // div) % q)
    truth = eng.eval_formula(dset.formula, env, hi - lo)
    count = int(truth.sum())
    if not collect:
        return count, None
    sat = idx[truth]
    return count, sat


def _budget_check(dset, spec, max_evals):
    n = len(dset.free_vars)
    total = spec.q**n
    if total > max_evals:
        raise BudgetError(
            f"enumerating {dset.name} over {spec!r} needs {total} assignments "
            f"(budget {max_evals})"
        )
    return total


def _run_chunks(dset, spec, collect, jobs, max_evals):
    total = _budget_check(dset, spec, max_evals)
    rows = _chunk_rows(spec.e)
    ranges = [(lo, min(lo + rows, total)) for lo in range(0, total, rows)]
    if jobs > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(
                pool.map(
                    _chunk_worker,
                    [(dset, spec, lo, hi, collect) for lo, hi in ranges],
                    chunksize=1,
                )
            )
    else:
        parts = [_eval_chunk(dset, spec, lo, hi, collect) for lo, hi in ranges]
    count = sum(c for c, _ in parts)
    if not collect:
        return count, None
    sats = [s for _, s in parts if s is not None and s.shape[0]]
    sat = np.concatenate(sats) if sats else np.empty(0, dtype=np.int64)
    return count, sat


def _chunk_worker(args):
    return _eval_chunk(*args)


def count_points_vec(dset, spec, *, jobs=1, max_evals=DEFAULT_MAX_EVALS) -> int:
    count, _ = _run_chunks(dset, spec, False, jobs, max_evals)
    return count


def collect_points_vec(dset, spec, *, jobs=1, max_evals=DEFAULT_MAX_EVALS) -> np.ndarray:
    """Element-index matrix of the satisfying assignments, shape (n, |X|).

    Row j holds the values of the j-th declared free variable; columns are
    in enumeration order.
    """
    _, sat = _run_chunks(dset, spec, True, jobs, max_evals)
    n = len(dset.free_vars)
    q = spec.q
    out = np.empty((n, sat.shape[0]), dtype=np.int64)
    for j in range(n):
        div = q ** (n - 1 - j)
        out[j] = (sat // div) % q
    return out
