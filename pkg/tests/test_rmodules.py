"""Finite modules as expanded groups: presentation validation, polynomial
term encoding, and agreement between direct endomorphism arithmetic and
term evaluation over the generated tables."""

import pytest
from hypothesis import given, settings, strategies as st

from expgroups import truth
from expgroups.algebras import ParamOutOfRangeError
from expgroups.rmodules import (
    IntPolynomial,
    NonAdditiveActionError,
    NonCommutingActionsError,
    RelationViolatedError,
    RModulePresentation,
    build_r_module,
    build_r_module_from_params,
    encode_polynomial_term,
    evaluate_polynomial_endo,
    module_identity_basis,
    omega_symbol,
    sqrt2_module,
)
from expgroups.specfiles import print_term
from expgroups.terms import eval_term


def test_int_polynomial_canonicalization():
    p = IntPolynomial.of([(2, (1,)), (1, (2, 1)), (-2, (1,)), (3, ())])
    # The y1 monomials cancel; order is by (degree, indices).
    assert p.terms == ((3, ()), (1, (1, 2)))
    assert p.max_var() == 2
    assert p.plus(IntPolynomial.of([(-3, ())])).terms == ((1, (1, 2)),)


def test_int_polynomial_rejects_bad_variable():
    with pytest.raises(ParamOutOfRangeError):
        IntPolynomial.of([(1, (0,))])


def test_sqrt2_module_shape():
    pres, alg = sqrt2_module()
    assert alg.size == 16
    assert pres.m == 1
    assert [s.name for s in alg.sig.omega] == ["w1"]
    # w1(w1(v)) = v + v for every carrier element.
    w1 = alg.np_table("w1")
    plus = alg.np_table("+")
    for v in range(16):
        assert w1[w1[v]] == plus[v, v]


def test_sqrt2_module_satisfies_its_own_basis():
    pres, alg = sqrt2_module()
    basis = module_identity_basis(pres)
    assert basis.requires_nilpotent_additive
    assert truth.satisfies_basis(alg, basis)


def test_non_additive_action_rejected():
    # e1 has order 2 but its image generates an order-4 element.
    pres = RModulePresentation(orders=(2, 4), endomorphisms=(((0, 1), (0, 0)),))
    with pytest.raises(NonAdditiveActionError):
        build_r_module(pres)


def test_non_commuting_actions_rejected():
    # Over Z2 x Z2, swap and projection-to-first do not commute.
    swap = ((0, 1), (1, 0))
    proj = ((1, 0), (0, 0))
    pres = RModulePresentation(orders=(2, 2), endomorphisms=(swap, proj))
    with pytest.raises(NonCommutingActionsError):
        build_r_module(pres)


def test_relation_violation_rejected():
    # The sqrt2 action does not satisfy w1 = 0.
    pres = RModulePresentation(
        orders=(4, 4),
        endomorphisms=(((0, 1), (2, 0)),),
        relations=(IntPolynomial.of([(1, (1,))]),),
    )
    with pytest.raises(RelationViolatedError):
        build_r_module(pres)


def test_orders_must_be_positive():
    with pytest.raises(ParamOutOfRangeError):
        build_r_module(RModulePresentation(orders=(0,), endomorphisms=()))


def test_encode_polynomial_term_shape():
    # w1^2 - 2 becomes a difference of two left-associated sums.
    poly = IntPolynomial.of([(1, (1, 1)), (-2, ())])
    t = encode_polynomial_term(poly, 1)
    assert print_term(t) == "(+ (op w1 (op w1 x1)) (neg (+ x1 x1)))"
    assert print_term(encode_polynomial_term(IntPolynomial.of([]), 1)) == "zero"
    assert print_term(encode_polynomial_term(IntPolynomial.of([(-1, ())]), 1)) == "(neg x1)"


def test_encode_polynomial_term_rejects_excess_variable():
    with pytest.raises(ParamOutOfRangeError):
        encode_polynomial_term(IntPolynomial.of([(1, (2,))]), 1)


def test_omega_symbol_naming():
    assert omega_symbol(3).name == "w3"
    assert omega_symbol(3).arity == 1


def test_build_from_params_matches_direct_construction():
    params = {
        "orders": [4, 4],
        "endomorphisms": [[[0, 1], [2, 0]]],
        "relations": [[{"coeff": 1, "vars": [1, 1]}, {"coeff": -2, "vars": []}]],
    }
    alg = build_r_module_from_params(params)
    _, direct = sqrt2_module()
    assert alg.size == direct.size
    assert alg.tables["+"] == direct.tables["+"]
    assert alg.tables["w1"] == direct.tables["w1"]


monomials = st.lists(st.integers(1, 1), min_size=0, max_size=3).map(tuple)
polys = st.lists(
    st.tuples(st.integers(-3, 3), monomials), min_size=0, max_size=4
).map(IntPolynomial.of)


@settings(max_examples=60, deadline=None)
@given(polys, st.integers(0, 15))
def test_polynomial_endo_agrees_with_term_evaluation(poly, v):
    # Two independent routes to p(w1)(v): matrix-style endomorphism
    # arithmetic versus evaluating the encoded term on the Cayley tables.
    pres, alg = sqrt2_module()
    endos = [alg.np_table("w1")]
    image = evaluate_polynomial_endo(
        poly, endos, alg.np_table("+"), alg.np_table("-"), alg.zero
    )
    t = encode_polynomial_term(poly, 1)
    assert eval_term(alg, t, (v,)) == image[v]


def test_module_basis_rejects_wrong_module():
    # A plain Z16 module with w1 = identity map does not satisfy the
    # sqrt2 relation basis.
    pres, _ = sqrt2_module()
    basis = module_identity_basis(pres)
    other = build_r_module(
        RModulePresentation(orders=(16,), endomorphisms=(((1,),),))
    )
    assert not truth.satisfies_basis(other, basis)
