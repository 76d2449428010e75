import itertools

import pytest

from defent import DomainError, field, prime_power
from defent.gf import FieldSpec, _irreducible


def test_canonical_moduli():
    assert field(7, 1).modulus == (0, 1)                 # plain mod-7 arithmetic
    assert field(2, 2).modulus == (1, 1, 1)              # x^2 + x + 1
    assert field(3, 2).modulus == (1, 0, 1)              # x^2 + 1
    assert field(2, 2).modulus_str() == "x^2 + x + 1"


def test_modulus_is_smallest_irreducible():
    # every earlier monic polynomial of the same degree must be reducible
    for p, e in [(2, 3), (3, 2), (5, 2), (7, 2)]:
        spec = field(p, e)
        f = list(spec.modulus)
        idx = spec.index(f[:e])
        for smaller in range(idx):
            coeffs = []
            v = smaller
            for _ in range(e):
                coeffs.append(v % p)
                v //= p
            assert not _irreducible(coeffs + [1], p)
        assert _irreducible(f, p)


def test_bad_field_args():
    with pytest.raises(DomainError):
        field(6)
    with pytest.raises(DomainError):
        FieldSpec(5, 0)


def test_arithmetic_examples():
    F7 = field(7)
    assert F7.inv(3) == 5
    assert F7.mul(3, 5) == 1
    F4 = field(2, 2)
    # index 2 is x; x*x = x+1 which is index 3
    assert F4.mul(2, 2) == 3
    for spec in (F7, F4, field(3, 2)):
        for g in spec.elements():
            if g:
                assert spec.pow(g, spec.q - 1) == 1


def test_field_axioms_exhaustive_gf9():
    spec = field(3, 2)
    els = list(spec.elements())
    for a, b in itertools.product(els, els):
        assert spec.add(a, b) == spec.add(b, a)
        assert spec.mul(a, b) == spec.mul(b, a)
        assert spec.add(a, spec.neg(a)) == 0
        if a:
            assert spec.mul(a, spec.inv(a)) == 1
    for a, b, c in itertools.product(els[:5], els[:5], els):
        assert spec.mul(a, spec.add(b, c)) == spec.add(spec.mul(a, b), spec.mul(a, c))
        assert spec.mul(spec.mul(a, b), c) == spec.mul(a, spec.mul(b, c))


def test_enumeration():
    assert list(field(5).elements()) == [0, 1, 2, 3, 4]
    assert len(list(field(2, 2).elements())) == 4
    assert len(list(field(3, 1).elements())) == 3
    spec = field(5, 2)
    # element i has the base-p digits of i, constant coefficient first
    assert spec.digits(7) == [2, 1]
    assert spec.index([2, 1]) == 7
    assert len(set(spec.elements())) == 25


def test_generator_examples():
    assert field(7).generator() == 3
    assert field(2).generator() == 1
    assert field(5).generator() == 2


@pytest.mark.parametrize("p,e", [(2, 1), (5, 1), (13, 1), (2, 4), (3, 3), (7, 2)])
def test_generator_spans_units(p, e):
    spec = field(p, e)
    g = spec.generator()
    seen = set()
    x = 1
    for _ in range(spec.q - 1):
        seen.add(x)
        x = spec.mul(x, g)
    assert x == 1
    assert seen == set(range(1, spec.q))


def test_inv_zero_raises():
    with pytest.raises(DomainError):
        field(5).inv(0)
    with pytest.raises(DomainError):
        field(2, 2).inv(0)


def test_negative_exponent():
    spec = field(7)
    assert spec.pow(3, -1) == 5
    assert spec.pow(3, -2) == spec.mul(5, 5)


def test_prime_power():
    assert prime_power(49) == (7, 2)
    assert prime_power(7) == (7, 1)
    assert prime_power(12) is None
    assert prime_power(1) is None


def test_element_str():
    assert field(3, 2).element_str(5) == "5@GF(3^2)"
    assert field(7).element_str(5) == "5@GF(7)"


def test_spec_identity_and_cache():
    assert field(5, 2) is field(5, 2)
    assert field(5, 2) == FieldSpec(5, 2)
    assert field(5, 2) != field(5, 1)
