"""Derived unary signatures, derived sessions, and ideal generation.

For an element tuple g = (g_1..g_m) of the hidden algebra, the derived
signature has one conjugation symbol chi_i per g_i and one slot symbol
psi_<omega>_<j>[_<fillers>] per nonnullary omega, argument slot j and
filler tuple d over {1..m}:

    chi_i(h)          = -g_i + h + g_i
    psi_omega_j_d(h)  = omega(g_d1, .., h at slot j, .., g_d(ar-1))

All derived symbols are unary.  Subgroups closed under every derived
symbol are exactly the ideals when g additively generates the hidden
group; ideals are closed under them for any g whatsoever, which is what
makes the second generation run below safe unconditionally.

Sessions here answer derived queries through base-session queries only:
one cached negation per g_i, then two additions per chi query and one
omega query per psi query.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .blackbox import (
    ArityMismatchError,
    Handle,
    ScalarLaneBatch,
    UnknownSymbolError,
)
from .randgen import GenParams, additive_generating_system, reduce_generating_system


@dataclass(frozen=True)
class DerivedSymbol:
    """One unary symbol of the derived signature."""

    name: str
    kind: str  # "chi" or "psi"
    slot: int  # chi: which g_i (1-based); psi: which argument slot takes h
    omega: str | None = None
    fillers: tuple[int, ...] = ()  # psi: 1-based indices into g, len = arity-1


def build_derived_signature(omega: tuple[tuple[str, int], ...],
                            m: int) -> tuple[DerivedSymbol, ...]:
    """chi_1..chi_m, then psi per omega symbol in signature order, per slot,
    per filler tuple in lexicographic order."""
    if m < 0:
        raise ValueError("tuple length must be >= 0")
    syms = [DerivedSymbol(f"chi_{i}", "chi", i) for i in range(1, m + 1)]
    for name, arity in omega:
        if arity == 0:
            continue
        for j in range(1, arity + 1):
            for d in itertools.product(range(1, m + 1), repeat=arity - 1):
                suffix = f"_{'-'.join(map(str, d))}" if d else ""
                syms.append(DerivedSymbol(f"psi_{name}_{j}{suffix}", "psi", j,
                                          omega=name, fillers=d))
    return tuple(syms)


def derived_signature_size(omega: tuple[tuple[str, int], ...], m: int) -> int:
    return m + sum(a * m ** (a - 1) for _, a in omega if a >= 1)


class DerivedOracle:
    """Scalar session for gamma plus the derived signature of g."""

    def __init__(self, base, g: list[Handle]):
        self.base = base
        self.g = list(g)
        self.neg_g = [base.query_op("-", h) for h in self.g]
        self._symbols = {
            s.name: s for s in build_derived_signature(base.omega_symbols(), len(g))
        }

    @property
    def n(self) -> int:
        return self.base.n

    def omega_symbols(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, 1) for name in self._symbols)

    def query_equal(self, a: Handle, b: Handle) -> bool:
        return self.base.query_equal(a, b)

    def query_op(self, name: str, *args: Handle) -> Handle:
        if name in ("+", "-", "0"):
            return self.base.query_op(name, *args)
        sym = self._symbols.get(name)
        if sym is None:
            raise UnknownSymbolError(f"unknown derived symbol {name!r}")
        if len(args) != 1:
            raise ArityMismatchError(f"{name!r} takes 1 argument, got {len(args)}")
        h = args[0]
        if sym.kind == "chi":
            i = sym.slot - 1
            return self.base.query_op("+", self.base.query_op("+", self.neg_g[i], h),
                                      self.g[i])
        fill = list(sym.fillers)
        full = [h if slot == sym.slot else self.g[fill.pop(0) - 1]
                for slot in range(1, _arity_of(self.base, sym.omega) + 1)]
        return self.base.query_op(sym.omega, *full)


def _arity_of(base, name: str) -> int:
    for sym_name, arity in base.omega_symbols():
        if sym_name == name:
            return arity
    raise UnknownSymbolError(f"unknown base symbol {name!r}")


class DerivedBatchOracle:
    """Batch-protocol session for gamma plus the derived signature of g.

    g is a (width, m) bits array: each lane carries its own tuple.  chi
    costs two base additions per position (negations cached at build
    time, m per lane); psi costs one base omega query.
    """

    def __init__(self, base, g: np.ndarray):
        self.base = base
        self.width = base.width
        self.n = base.n
        self._g = g
        self._neg_g = base.op("-", (g,)) if g.shape[1] else g
        self._arities = dict(base.omega_symbols())
        self._symbols = {
            s.name: s for s in build_derived_signature(base.omega_symbols(), g.shape[1])
        }

    def omega_symbols(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, 1) for name in self._symbols)

    def _column(self, arr: np.ndarray, i: int, ndim: int) -> np.ndarray:
        return arr[:, i].reshape((self.width,) + (1,) * (ndim - 1))

    def op(self, name: str, args: tuple, shape=None, where=None) -> np.ndarray:
        if name in ("+", "-", "0"):
            return self.base.op(name, args, shape=shape, where=where)
        sym = self._symbols.get(name)
        if sym is None:
            raise UnknownSymbolError(f"unknown derived symbol {name!r}")
        if len(args) != 1:
            raise ArityMismatchError(f"{name!r} takes 1 argument, got {len(args)}")
        h = np.asarray(args[0])
        if sym.kind == "chi":
            i = sym.slot - 1
            left = self.base.op("+", (self._column(self._neg_g, i, h.ndim), h),
                                where=where)
            return self.base.op("+", (left, self._column(self._g, i, h.ndim)),
                                where=where)
        fill = list(sym.fillers)
        full = tuple(
            h if slot == sym.slot
            else self._column(self._g, fill.pop(0) - 1, h.ndim)
            for slot in range(1, self._arities[sym.omega] + 1)
        )
        return self.base.op(sym.omega, full, where=where)

    def equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.base.equal(a, b)


def ideal_additive_generators(batch, n: int, s: np.ndarray, t: np.ndarray,
                              params: GenParams, rng,
                              reduce_between: bool = True) -> np.ndarray:
    """Additive generators of the ideal generated by t, per lane.

    First computes additive generators g of the whole hidden group from
    the signature-generating tuple s, then reruns the generation
    algorithm over the derived signature of g starting from t.  Output
    always lies in the ideal generated by t; it additively generates that
    ideal with probability >= 1 - 2n/c^n per lane without reduction.

    reduce_between shrinks g to k*n random subsums before the second run
    (the derived signature is quadratic in len(g), so this is what keeps
    the run polynomial-practical); it adds one c^-n failure term, for
    (2n+1)/c^n total.
    """
    g = additive_generating_system(batch, n, s, params, rng)
    if reduce_between:
        g = reduce_generating_system(batch, n, g, params, rng)
    derived = DerivedBatchOracle(batch, g)
    return additive_generating_system(derived, n, t, params, rng)


def run_c_single(session, n: int, s: list[Handle], t: list[Handle],
                 params: GenParams, rng, reduce_between: bool = True) -> list[Handle]:
    """Scalar-session entry point: one trial through the batch engine."""
    batch = ScalarLaneBatch([session])
    s_bits = np.array([[h.bits for h in s]], dtype=np.int64).reshape(1, len(s))
    t_bits = np.array([[h.bits for h in t]], dtype=np.int64).reshape(1, len(t))
    out = ideal_additive_generators(batch, n, s_bits, t_bits, params, rng,
                                    reduce_between=reduce_between)
    return [Handle(int(b), session.n) for b in out[0]]
