"""Identity bases, enumeration over a black-box session, and variety
membership decision.

The decision procedure composes the randomized additive-generator
algorithm with a deterministic checker: enumerate the additive closure of
the generators through the session, then test every identity of the basis
on every assignment of enumerated elements.  The checker is exponential
in the encoding length (it walks all of the hidden group) but polynomial
in the group order, which is the intended desk-scale trade.  Wrong
answers can come only from the generator step failing to reach the whole
group, so the error is one-sided and inherits that step's bound n/c^n.

The checker refuses bases not flagged nilpotent-additive: the probability
guarantee is proven only for varieties whose members have nilpotent
additive groups, and silently answering would misstate the contract.

Enumeration exists in two forms: a scalar worklist (the readable
reference) and a lockstep masked form over the batch protocol, where
every lane grows its own element buffer and finished lanes idle under
masks.  Identity checking pads each lane's elements to a common width by
repeating the zero handle; duplicate assignments cannot change a
universally quantified answer, so padding is sound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .blackbox import Handle, ScalarLaneBatch
from .randgen import GenParams, additive_generating_system
from .terms import (
    App,
    BudgetExceededError,
    GAMMA,
    Identity,
    OpSymbol,
    Term,
    Var,
    add,
    app,
    sub,
    var,
    zero,
)

ENUM_CAP = 4096
ASSIGN_CAP = 1 << 20


class NonNilpotentBasisError(ValueError):
    """Basis not flagged nilpotent-additive; the decision bound would not apply."""


@dataclass(frozen=True)
class IdentityBasis:
    """A named finite set of identities cutting out a variety.

    requires_nilpotent_additive asserts (unverified) that every member's
    additive group is nilpotent; the decision procedure insists on it.
    An empty identity list denotes the variety of all expanded groups of
    the signature.  omega lists the non-group symbols the identities use.
    """

    name: str
    identities: tuple[Identity, ...]
    requires_nilpotent_additive: bool
    omega: tuple[OpSymbol, ...] = ()

    def __post_init__(self):
        allowed = {s.name for s in GAMMA} | {s.name for s in self.omega}
        for ident in self.identities:
            for t in (ident.lhs, ident.rhs):
                for sym in _term_symbols(t):
                    if sym.name not in allowed:
                        raise ValueError(f"identity uses symbol {sym.name!r} "
                                         f"outside the basis signature")


def _term_symbols(t: Term):
    if isinstance(t, App):
        yield t.symbol
        for child in t.args:
            yield from _term_symbols(child)


@dataclass(frozen=True)
class EnumeratedAlgebra:
    """Handles of pairwise-distinct elements, closed under the group part."""

    handles: tuple[Handle, ...]

    def __len__(self) -> int:
        return len(self.handles)


def enumerate_from_additive_gens(session, g: list[Handle],
                                 cap: int = ENUM_CAP) -> EnumeratedAlgebra:
    """Worklist closure of g under 0, + (both orders) and -, deduplicated
    by equality queries.  Returns the subgroup generated by g; that is all
    of the hidden group exactly when g additively generates it."""
    elems = [session.query_op("0")]

    def seen(h: Handle) -> bool:
        return any(session.query_equal(h, e) for e in elems)

    def put(h: Handle):
        if not seen(h):
            if len(elems) >= cap:
                raise BudgetExceededError(f"enumeration exceeded cap {cap}")
            elems.append(h)

    for h in g:
        put(h)
    i = 0
    while i < len(elems):
        x = elems[i]
        put(session.query_op("-", x))
        j = 0
        while j < len(elems):
            y = elems[j]
            put(session.query_op("+", x, y))
            put(session.query_op("+", y, x))
            j += 1
        i += 1
    return EnumeratedAlgebra(tuple(elems))


def _eval_term_scalar(session, t: Term, assignment: list[Handle]) -> Handle:
    if isinstance(t, Var):
        return assignment[t.index - 1]
    return session.query_op(t.symbol.name,
                            *(_eval_term_scalar(session, c, assignment)
                              for c in t.args))


def find_identity_violation_enumerated(session, enum: EnumeratedAlgebra,
                                       basis: IdentityBasis,
                                       assign_cap: int = ASSIGN_CAP):
    """First (identity, assignment) violated, scanning assignments row-major
    with the rightmost variable fastest; None when the basis holds."""
    size = len(enum)
    for ident in basis.identities:
        if size ** ident.var_count > assign_cap:
            raise BudgetExceededError(
                f"{size}^{ident.var_count} assignments exceed cap {assign_cap}")
        for combo in itertools.product(range(size), repeat=ident.var_count):
            assignment = [enum.handles[i] for i in combo]
            lhs = _eval_term_scalar(session, ident.lhs, assignment)
            rhs = _eval_term_scalar(session, ident.rhs, assignment)
            if not session.query_equal(lhs, rhs):
                return ident, tuple(assignment)
    return None


def check_identities(session, enum: EnumeratedAlgebra, basis: IdentityBasis,
                     assign_cap: int = ASSIGN_CAP) -> bool:
    """True iff every identity holds on every assignment of enum elements."""
    return find_identity_violation_enumerated(session, enum, basis,
                                              assign_cap) is None


# ---------------------------------------------------------------------------
# lockstep batch forms


def batch_additive_enumeration(batch, g: np.ndarray, cap: int = ENUM_CAP):
    """Per-lane additive closure of g through the batch protocol.

    Returns (elements, counts): elements is (width, L) handle bits with
    lane i's subgroup in its first counts[i] columns, remaining slots
    zero-filled.  Lanes that finish early idle under where-masks.
    """
    width, m = g.shape
    elements = np.zeros((width, max(4, m + 1)), dtype=g.dtype)
    elements[:, 0] = batch.op("0", (), shape=(width,))
    counts = np.ones(width, dtype=np.int64)

    def insert(cand: np.ndarray, active: np.ndarray) -> bool:
        nonlocal elements
        if int(counts.max()) >= elements.shape[1]:
            elements = np.concatenate(
                [elements, np.zeros_like(elements)], axis=1)
        width_l = elements.shape[1]
        valid = np.arange(width_l)[None, :] < counts[:, None]
        hit = (batch.equal(cand[:, None], elements) & valid).any(axis=1)
        ins = active & ~hit
        if not ins.any():
            return False
        if int(counts[ins].max()) >= cap:
            raise BudgetExceededError(f"enumeration exceeded cap {cap}")
        rows = np.flatnonzero(ins)
        elements[rows, counts[rows]] = cand[rows]
        counts[rows] += 1
        return True

    everyone = np.ones(width, dtype=bool)
    for j in range(m):
        insert(g[:, j], everyone)
    changed = True
    while changed:
        changed = False
        top = int(counts.max())
        for p in range(top):
            active = p < counts
            cand = batch.op("-", (elements[:, p],), where=active)
            changed |= insert(cand, active)
        for p in range(top):
            for q in range(top):
                active = (p < counts) & (q < counts)
                cand = batch.op("+", (elements[:, p], elements[:, q]),
                                where=active)
                changed |= insert(cand, active)
    return elements, counts


def _eval_term_batch(batch, t: Term, var_cols: list[np.ndarray],
                     shape) -> np.ndarray:
    if isinstance(t, Var):
        return var_cols[t.index - 1]
    args = tuple(_eval_term_batch(batch, c, var_cols, shape) for c in t.args)
    return batch.op(t.symbol.name, args, shape=shape)


def batch_check_identities(batch, elements: np.ndarray, counts: np.ndarray,
                           basis: IdentityBasis,
                           assign_cap: int = ASSIGN_CAP) -> np.ndarray:
    """Per-lane truth of the basis over each lane's first counts[i] elements.

    Pads every lane to the widest lane by repeating its zero handle
    (column 0); duplicated assignments do not change a universal check.
    """
    width = elements.shape[0]
    top = int(counts.max())
    valid = np.arange(top)[None, :] < counts[:, None]
    padded = np.where(valid, elements[:, :top], elements[:, :1])
    out = np.ones(width, dtype=bool)
    for ident in basis.identities:
        v = ident.var_count
        total = top ** v
        if total > assign_cap:
            raise BudgetExceededError(
                f"{top}^{v} assignments exceed cap {assign_cap}")
        if v:
            grids = np.indices((top,) * v).reshape(v, total)
            var_cols = [padded[:, grids[i]] for i in range(v)]
        else:
            var_cols = []
        lhs = _eval_term_batch(batch, ident.lhs, var_cols, (width, total))
        rhs = _eval_term_batch(batch, ident.rhs, var_cols, (width, total))
        out &= batch.equal(lhs, rhs).all(axis=1)
    return out


def decide_from_additive_generators(batch, g: np.ndarray, basis: IdentityBasis,
                                    enum_cap: int = ENUM_CAP,
                                    assign_cap: int = ASSIGN_CAP) -> np.ndarray:
    """Deterministic tail of the decision: enumerate ⟨g⟩, check the basis.

    Exact when g additively generates the hidden group; may answer wrong
    (never crash) when it generates a proper subgroup.
    """
    elements, counts = batch_additive_enumeration(batch, g, cap=enum_cap)
    return batch_check_identities(batch, elements, counts, basis,
                                  assign_cap=assign_cap)


def decide_variety_membership(batch, n: int, s: np.ndarray,
                              basis: IdentityBasis, params: GenParams, rng,
                              enum_cap: int = ENUM_CAP,
                              assign_cap: int = ASSIGN_CAP) -> np.ndarray:
    """Per-lane answer to "does the hidden algebra satisfy the basis".

    Correct with probability >= 1 - n/c^n per lane; errors arise only when
    the generator step misses part of the group.
    """
    if not basis.requires_nilpotent_additive:
        raise NonNilpotentBasisError(
            f"basis {basis.name!r} is not flagged nilpotent-additive; "
            f"the decision guarantee does not apply")
    g = additive_generating_system(batch, n, s, params, rng)
    return decide_from_additive_generators(batch, g, basis,
                                           enum_cap=enum_cap,
                                           assign_cap=assign_cap)


def run_d_single(session, n: int, s: list[Handle], basis: IdentityBasis,
                 params: GenParams, rng, enum_cap: int = ENUM_CAP,
                 assign_cap: int = ASSIGN_CAP) -> bool:
    """Scalar-session entry point: one trial through the batch engine."""
    batch = ScalarLaneBatch([session])
    bits = np.array([[h.bits for h in s]], dtype=np.int64).reshape(1, len(s))
    out = decide_variety_membership(batch, n, bits, basis, params, rng,
                                    enum_cap=enum_cap, assign_cap=assign_cap)
    return bool(out[0])


# ---------------------------------------------------------------------------
# shipped bases


def _commutator(a: Term, b: Term) -> Term:
    return sub(sub(add(a, b), a), b)


MUL = OpSymbol("mul", 2)


def abelian_basis() -> IdentityBasis:
    return IdentityBasis(
        name="abelian",
        identities=(Identity.of(add(var(1), var(2)), add(var(2), var(1))),),
        requires_nilpotent_additive=True,
    )


def nilpotent_class2_basis() -> IdentityBasis:
    law = _commutator(_commutator(var(1), var(2)), var(3))
    return IdentityBasis(
        name="nilpotent-class-2",
        identities=(Identity.of(law, zero()),),
        requires_nilpotent_additive=True,
    )


def commutative_rings_basis() -> IdentityBasis:
    return IdentityBasis(
        name="commutative-rings",
        identities=(
            Identity.of(add(var(1), var(2)), add(var(2), var(1))),
            Identity.of(app(MUL, var(1), var(2)), app(MUL, var(2), var(1))),
        ),
        requires_nilpotent_additive=True,
        omega=(MUL,),
    )


def anticommutative_rings_basis() -> IdentityBasis:
    return IdentityBasis(
        name="anticommutative-rings",
        identities=(
            Identity.of(add(var(1), var(2)), add(var(2), var(1))),
            Identity.of(add(app(MUL, var(1), var(2)), app(MUL, var(2), var(1))),
                        zero()),
        ),
        requires_nilpotent_additive=True,
        omega=(MUL,),
    )


STANDARD_BASES = {
    "abelian": abelian_basis,
    "nilpotent-class-2": nilpotent_class2_basis,
    "commutative-rings": commutative_rings_basis,
    "anticommutative-rings": anticommutative_rings_basis,
}


def standard_basis(name: str) -> IdentityBasis:
    try:
        return STANDARD_BASES[name]()
    except KeyError:
        raise KeyError(f"unknown standard basis {name!r}; "
                       f"available: {sorted(STANDARD_BASES)}") from None
