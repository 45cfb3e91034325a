"""Finite modules presented by commuting endomorphisms, as expanded groups.

A presentation is a finite abelian group (direct product of cyclic groups
of the given orders) together with m pairwise-commuting additive
endomorphisms w1..wm, each given as an integer matrix whose row i is the
image of the i-th basis vector, and a set of integer polynomial relations
in m commuting variables that must annihilate the carrier.

The resulting expanded group has unary extra symbols w1..wm.  Integer
polynomials also translate to signature terms (encode_polynomial_term):
monomials become nested unary applications, and the polynomial becomes a
difference of two left-associated sums ordered length-then-lexicographic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebras import CayleyAlgebra, ParamOutOfRangeError
from .terms import OpSymbol, Signature, Term, add, app, neg, sum_terms, var, zero


class NonAdditiveActionError(ValueError):
    """An endomorphism matrix does not define an additive map on the carrier."""


class NonCommutingActionsError(ValueError):
    """Two of the declared endomorphisms do not commute."""


class RelationViolatedError(ValueError):
    """A declared polynomial relation does not annihilate the carrier."""


Monomial = tuple[int, ...]  # nondecreasing variable indices, 1-based; () is the constant


@dataclass(frozen=True)
class IntPolynomial:
    """An integer polynomial in commuting variables y1..ym, stored as a
    canonical tuple of (coefficient, monomial) with zero coefficients dropped."""

    terms: tuple[tuple[int, Monomial], ...]

    @classmethod
    def of(cls, entries) -> "IntPolynomial":
        acc: dict[Monomial, int] = {}
        for coeff, mono in entries:
            key = tuple(sorted(mono))
            if any(i < 1 for i in key):
                raise ParamOutOfRangeError(f"monomial {mono}: variable indices are 1-based")
            acc[key] = acc.get(key, 0) + int(coeff)
        cleaned = [(c, m) for m, c in acc.items() if c != 0]
        cleaned.sort(key=lambda t: (len(t[1]), t[1]))
        return cls(tuple(cleaned))

    def plus(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial.of(list(self.terms) + list(other.terms))

    def max_var(self) -> int:
        return max((max(m) for _, m in self.terms if m), default=0)


@dataclass(frozen=True)
class RModulePresentation:
    """Carrier orders, endomorphism matrices (rows = images of basis vectors),
    and polynomial relations that must vanish on the carrier."""

    orders: tuple[int, ...]
    endomorphisms: tuple[tuple[tuple[int, ...], ...], ...]
    relations: tuple[IntPolynomial, ...] = ()

    @property
    def m(self) -> int:
        return len(self.endomorphisms)

    @property
    def size(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out


def omega_symbol(i: int) -> OpSymbol:
    """The unary symbol w<i> for the i-th endomorphism, 1-based."""
    return OpSymbol(f"w{i}", 1)


def _element_tuples(orders):
    return list(itertools.product(*[range(o) for o in orders]))


def _endo_array(pres: RModulePresentation, matrix, which: int) -> np.ndarray:
    """Index map of one endomorphism; checks well-definedness on each cyclic factor."""
    orders = pres.orders
    rank = len(orders)
    if len(matrix) != rank or any(len(row) != rank for row in matrix):
        raise ParamOutOfRangeError(f"endomorphism {which}: matrix must be {rank}x{rank}")
    for i in range(rank):
        for j in range(rank):
            # e_i has order orders[i], so orders[i] * image(e_i) must vanish.
            if (orders[i] * matrix[i][j]) % orders[j] != 0:
                raise NonAdditiveActionError(
                    f"endomorphism {which}: orders[{i}] * row[{i}][{j}] "
                    f"not divisible by orders[{j}]"
                )
    elems = _element_tuples(orders)
    index = {t: i for i, t in enumerate(elems)}
    out = np.zeros(len(elems), dtype=np.int64)
    for idx, t in enumerate(elems):
        img = tuple(
            sum(t[i] * matrix[i][j] for i in range(rank)) % orders[j] for j in range(rank)
        )
        out[idx] = index[img]
    return out


def _endo_add(plus: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return plus[f, g]


def evaluate_polynomial_endo(
    poly: IntPolynomial, endos: list[np.ndarray], plus: np.ndarray, negt: np.ndarray,
    zero_idx: int,
) -> np.ndarray:
    """The index map v -> p(w1..wm)(v) computed by direct endomorphism arithmetic."""
    size = plus.shape[0]
    acc = np.full(size, zero_idx, dtype=np.int64)
    for coeff, mono in poly.terms:
        comp = np.arange(size)
        for i in mono:  # innermost application first
            comp = endos[i - 1][comp]
        if coeff < 0:
            comp = negt[comp]
        for _ in range(abs(coeff)):
            acc = _endo_add(plus, acc, comp)
    return acc


def build_r_module(pres: RModulePresentation, name: str = "") -> CayleyAlgebra:
    """Construct the expanded group for a presentation, verifying additivity,
    commutation and every relation by brute force."""
    if not pres.orders or any(o < 1 for o in pres.orders):
        raise ParamOutOfRangeError("orders must be positive")
    size = pres.size
    elems = _element_tuples(pres.orders)
    index = {t: i for i, t in enumerate(elems)}
    rank = len(pres.orders)
    plus = [
        [index[tuple((a[i] + b[i]) % pres.orders[i] for i in range(rank))] for b in elems]
        for a in elems
    ]
    negt = [index[tuple((-a[i]) % pres.orders[i] for i in range(rank))] for a in elems]
    endos = [_endo_array(pres, mat, i + 1) for i, mat in enumerate(pres.endomorphisms)]
    plus_np = np.asarray(plus, dtype=np.int64)
    negt_np = np.asarray(negt, dtype=np.int64)
    for i, f in enumerate(endos):
        for j in range(i + 1, len(endos)):
            g = endos[j]
            if not np.array_equal(f[g], g[f]):
                raise NonCommutingActionsError(f"w{i + 1} and w{j + 1} do not commute")
    zero_idx = index[tuple([0] * rank)]
    for r, poly in enumerate(pres.relations):
        if poly.max_var() > pres.m:
            raise ParamOutOfRangeError(f"relation {r}: uses y{poly.max_var()} but m={pres.m}")
        image = evaluate_polynomial_endo(poly, endos, plus_np, negt_np, zero_idx)
        bad = np.nonzero(image != zero_idx)[0]
        if bad.size:
            raise RelationViolatedError(
                f"relation {r} does not annihilate the carrier: element {bad[0]} "
                f"maps to {image[bad[0]]}"
            )
    omega = tuple(omega_symbol(i + 1) for i in range(pres.m))
    tables = {"+": plus, "-": negt, "0": zero_idx}
    for i, e in enumerate(endos):
        tables[f"w{i + 1}"] = e.tolist()
    basis = tuple(index[tuple(1 if j == i else 0 for j in range(rank))] for i in range(rank)
                  if pres.orders[i] > 1)
    return CayleyAlgebra(
        Signature(omega),
        size,
        tables,
        name=name or f"module{list(pres.orders)}m{pres.m}",
        element_names=[",".join(map(str, t)) for t in elems],
        sigma_generators=basis,
        additive_generators=basis,
    )


def sqrt2_module() -> tuple[RModulePresentation, CayleyAlgebra]:
    """Z4 x Z4 acted on by w1(a,b) = (2b, a), which satisfies w1**2 = 2."""
    pres = RModulePresentation(
        orders=(4, 4),
        endomorphisms=((((0, 1), (2, 0))),),
        relations=(IntPolynomial.of([(1, (1, 1)), (-2, ())]),),
    )
    return pres, build_r_module(pres, name="Z4sq-sqrt2")


def _monomial_term(mono: Monomial, v: Term) -> Term:
    """w_{i_d}(...(w_{i_1}(v))...); the empty monomial is v itself."""
    t = v
    for i in mono:
        t = app(omega_symbol(i), t)
    return t


def _sum_over_multiset(monos: list[Monomial], v: Term) -> Term:
    ordered = sorted(monos, key=lambda m: (len(m), m))
    return sum_terms([_monomial_term(m, v) for m in ordered])


def encode_polynomial_term(poly: IntPolynomial, m: int, var_index: int = 1) -> Term:
    """Translate an integer polynomial to a term in x<var_index> over w1..wm.

    Positive and negative coefficients expand to multisets of monomials
    (coefficient-many copies each); the result is sum(positive part) minus
    sum(negative part), degenerating to one part or to 0 when empty.
    """
    if poly.max_var() > m:
        raise ParamOutOfRangeError(f"polynomial uses y{poly.max_var()} but m={m}")
    v = var(var_index)
    plus_part: list[Monomial] = []
    minus_part: list[Monomial] = []
    for coeff, mono in poly.terms:
        (plus_part if coeff > 0 else minus_part).extend([mono] * abs(coeff))
    if plus_part and minus_part:
        return add(
            _sum_over_multiset(plus_part, v),
            neg(_sum_over_multiset(minus_part, v)),
        )
    if plus_part:
        return _sum_over_multiset(plus_part, v)
    if minus_part:
        return neg(_sum_over_multiset(minus_part, v))
    return zero()


def build_r_module_from_params(params: dict) -> CayleyAlgebra:
    """Family-dispatch entry: orders, endomorphisms (matrices), relations
    (lists of {coeff, vars} monomials)."""
    orders = tuple(int(o) for o in params["orders"])
    endos = tuple(
        tuple(tuple(int(x) for x in row) for row in mat) for mat in params["endomorphisms"]
    )
    rels = []
    for poly in params.get("relations", []):
        rels.append(
            IntPolynomial.of(
                [(int(t["coeff"]), tuple(int(v) for v in t.get("vars", ()))) for t in poly]
            )
        )
    pres = RModulePresentation(orders, endos, tuple(rels))
    return build_r_module(pres)


def module_identity_basis(pres: RModulePresentation, name: str = ""):
    """Identity basis for the module variety: additive commutativity, additivity
    and pairwise commutation of the actions, and one identity per relation."""
    from .varieties import IdentityBasis
    from .terms import Identity

    idents = [Identity(add(var(1), var(2)), add(var(2), var(1)), 2)]
    for i in range(1, pres.m + 1):
        w = omega_symbol(i)
        idents.append(
            Identity(app(w, add(var(1), var(2))), add(app(w, var(1)), app(w, var(2))), 2)
        )
    for i in range(1, pres.m + 1):
        for j in range(i + 1, pres.m + 1):
            wi, wj = omega_symbol(i), omega_symbol(j)
            idents.append(Identity(app(wi, app(wj, var(1))), app(wj, app(wi, var(1))), 1))
    for poly in pres.relations:
        idents.append(Identity(encode_polynomial_term(poly, pres.m), zero(), 1))
    return IdentityBasis(
        name=name or "module-relations",
        identities=tuple(idents),
        requires_nilpotent_additive=True,
        omega=tuple(omega_symbol(i + 1) for i in range(pres.m)),
    )
