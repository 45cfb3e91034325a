"""Explicit-table algebra constructions: every family is checked against
hand-computed group facts, and the validators are exercised with broken
tables."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expgroups.algebras import (
    CayleyAlgebra,
    NotAGroupError,
    NotDistributiveError,
    ParamOutOfRangeError,
    UnknownFamilyError,
    build_family,
    check_distributive,
    check_expanded_group,
    cyclic,
    dihedral,
    direct_product,
    matrix_ring,
    ring_mod_n,
    symmetric,
    upper_triangular,
)
from expgroups.terms import OpSymbol, Signature


def test_cyclic_tables():
    z6 = cyclic(6)
    assert z6.size == 6
    assert z6.zero == 0
    assert z6.plus(4, 5) == 3
    assert z6.negate(2) == 4
    assert z6.name == "Z6"
    assert z6.sigma_generators == (1,)


def test_cyclic_trivial_group():
    z1 = cyclic(1)
    assert z1.size == 1
    assert z1.plus(0, 0) == 0


def test_cyclic_rejects_nonpositive():
    with pytest.raises(ParamOutOfRangeError):
        cyclic(0)


def test_dihedral_structure():
    d4 = dihedral(4)
    assert d4.size == 8
    # Element e*4 + i stands for r^i f^e; generators are r and f.
    r, f = 1, 4
    assert d4.sigma_generators == (r, f)
    assert d4.plus(r, r) == 2
    assert d4.plus(f, f) == 0
    # f r f = r^-1: conjugating the rotation flips it.
    assert d4.plus(d4.plus(f, r), f) == d4.negate(r)
    assert not all(
        d4.plus(a, b) == d4.plus(b, a) for a in range(8) for b in range(8)
    )


def test_dihedral_rejects_degenerate_sizes():
    # Below n=3 the reflection x -> -x mod n is not a distinct permutation,
    # so the representation would be unfaithful.
    with pytest.raises(ParamOutOfRangeError):
        dihedral(2)


def test_symmetric_group():
    s3 = symmetric(3)
    assert s3.size == 6
    s4 = symmetric(4)
    assert s4.size == 24
    # The two declared generators must generate: check by brute closure.
    from expgroups import truth

    assert truth.generates_additively(s4, set(s4.sigma_generators))
    with pytest.raises(ParamOutOfRangeError):
        symmetric(6)


def test_ring_mod_n():
    z6r = ring_mod_n(6)
    assert z6r.name == "Z6ring"
    assert [s.name for s in z6r.sig.omega] == ["mul"]
    assert z6r.op("mul", 4, 5) == 2
    with_one = ring_mod_n(6, with_one=True)
    assert [s.name for s in with_one.sig.omega] == ["mul", "one"]
    assert with_one.op("one") == 1


def test_matrix_ring_units():
    m2 = matrix_ring(2, 2)
    assert m2.size == 16
    # Index packs entries as sum M[r][c] * p^(r*k+c): unit E(r,c) is a power of 2.
    e00, e01, e10, e11 = 1, 2, 4, 8
    assert m2.op("mul", e00, e00) == e00
    assert m2.op("mul", e00, e01) == e01
    assert m2.op("mul", e01, e00) == 0
    assert m2.op("mul", e01, e10) == e00
    assert m2.op("mul", e10, e01) == e11
    assert m2.plus(e00, e11) == e00 + e11


def test_upper_triangular_ring():
    ut2 = upper_triangular(2, 2)
    assert ut2.size == 8
    # Digit order (0,0), (0,1), (1,1): E12 is index 2, nilpotent under mul.
    e12 = 2
    assert ut2.op("mul", e12, e12) == 0
    assert ut2.op("mul", 1, e12) == e12
    assert ut2.op("mul", e12, 1) == 0


def test_direct_product():
    z2 = cyclic(2)
    prod = direct_product(z2, cyclic(3))
    assert prod.size == 6
    # Index is i * b.size + j.
    assert prod.plus(1 * 3 + 2, 0 * 3 + 2) == 1 * 3 + 1
    with pytest.raises(ValueError):
        direct_product(z2, ring_mod_n(2))


def test_build_family_dispatch():
    assert build_family("cyclic", {"n": 6}).size == 6
    assert build_family("dihedral", {"n": 4}).size == 8
    assert build_family("symmetric", {"n": 4}).size == 24
    assert build_family("ring_mod_n", {"n": 6, "with_one": True}).size == 6
    assert build_family("matrix_ring", {"k": 2, "p": 2}).size == 16
    assert build_family("upper_triangular", {"k": 2, "p": 2}).size == 8
    prod = build_family(
        "product", {"factors": [{"name": "cyclic", "params": {"n": 2}}] * 3}
    )
    assert prod.size == 8


def test_build_family_errors():
    with pytest.raises(UnknownFamilyError):
        build_family("quaternion", {})
    with pytest.raises(ParamOutOfRangeError):
        build_family("cyclic", {})
    with pytest.raises(ParamOutOfRangeError):
        build_family("product", {"factors": [{"name": "cyclic", "params": {"n": 2}}]})


def test_cayley_algebra_rejects_missing_and_extra_tables():
    sig = Signature(())
    with pytest.raises(ValueError):
        CayleyAlgebra(sig, 1, {"+": [[0]], "-": [0]})
    with pytest.raises(ValueError):
        CayleyAlgebra(sig, 1, {"+": [[0]], "-": [0], "0": 0, "mul": [[0]]})


def test_cayley_algebra_rejects_out_of_range_entries():
    sig = Signature(())
    with pytest.raises(ParamOutOfRangeError):
        CayleyAlgebra(sig, 2, {"+": [[0, 1], [1, 5]], "-": [0, 1], "0": 0})


def test_check_expanded_group_catches_bad_inverse():
    sig = Signature(())
    # + is Z2 addition but - is the identity map on a carrier where it is
    # not an inverse: claim -1 = 0 instead.
    alg = CayleyAlgebra(sig, 2, {"+": [[0, 1], [1, 0]], "-": [0, 0], "0": 0})
    with pytest.raises(NotAGroupError):
        check_expanded_group(alg)


def test_check_expanded_group_catches_nonassociative_plus():
    sig = Signature(())
    # A commutative loop that is not a group: subtraction mod 3 fails
    # associativity though 0 is a right identity.
    minus = [[(a - b) % 3 for b in range(3)] for a in range(3)]
    alg = CayleyAlgebra(sig, 3, {"+": minus, "-": [0, 1, 2], "0": 0})
    with pytest.raises(NotAGroupError):
        check_expanded_group(alg)


def test_check_distributive_catches_violation():
    mul = OpSymbol("mul", 2)
    # x*y = x ignores the right argument: distributive on the left slot
    # only, so the right slot check must fire.
    proj = [[a for _ in range(3)] for a in range(3)]
    plus = [[(a + b) % 3 for b in range(3)] for a in range(3)]
    alg = CayleyAlgebra(
        Signature((mul,)), 3, {"+": plus, "-": [0, 2, 1], "0": 0, "mul": proj}
    )
    check_expanded_group(alg)
    with pytest.raises(NotDistributiveError):
        check_distributive(alg)


def test_all_shipped_families_are_distributive_expanded_groups():
    candidates = [
        cyclic(6),
        dihedral(4),
        symmetric(4),
        ring_mod_n(6),
        ring_mod_n(6, with_one=True),
        matrix_ring(2, 2),
        upper_triangular(2, 2),
        direct_product(cyclic(2), cyclic(4)),
    ]
    for alg in candidates:
        check_expanded_group(alg)
        check_distributive(alg)


def test_np_table_matches_scalar_op():
    z6r = ring_mod_n(6)
    table = z6r.np_table("mul")
    assert table.dtype == np.int64
    for a, b in itertools.product(range(6), repeat=2):
        assert table[a, b] == z6r.op("mul", a, b)


def test_index_of_names():
    d4 = dihedral(4)
    assert d4.element_names is not None
    assert d4.index_of(d4.element_names[3]) == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=30))
def test_cyclic_is_always_a_group(n):
    alg = cyclic(n)
    check_expanded_group(alg)
    assert all(alg.plus(a, b) == (a + b) % n for a in range(n) for b in range(n))


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=3, max_value=8))
def test_dihedral_has_order_two_reflections(n):
    dn = dihedral(n)
    check_expanded_group(dn)
    for e in range(n, 2 * n):
        assert dn.plus(e, e) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.booleans())
def test_ring_mod_n_distributes(n, with_one):
    alg = ring_mod_n(n, with_one=with_one)
    check_expanded_group(alg)
    check_distributive(alg)
