"""Brute-force ground truth over explicit Cayley algebras.

Everything here works on plain element-index sets and dense tables; it is
the referee for the randomized black-box algorithms.  Two independent
subalgebra-closure implementations are kept on purpose: the step-operator
iteration (tau_step / sigma_closure) and a plain worklist saturation
(subalgebra_closure_worklist); tests require them to agree.

Functions taking all-subset masks (vec_*) vectorize a sweep over every
subset of a small carrier (size <= 16, masks as int64 bitsets) so the
exhaustive structural checks stay fast.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable

import numpy as np

from .algebras import CayleyAlgebra
from .terms import BudgetExceededError, identity_holds

ElementSet = frozenset  # of int element indices

SUBGROUP_CAP = 256


def subgroup_closure(alg: CayleyAlgebra, s: Iterable[int]) -> ElementSet:
    """Smallest subgroup of the additive group containing s."""
    plus = alg.tables["+"]
    negt = alg.tables["-"]
    known = {alg.zero}
    known.update(s)
    frontier = list(known)
    while frontier:
        nxt = []
        for a in frontier:
            na = negt[a]
            if na not in known:
                known.add(na)
                nxt.append(na)
        for a in list(known):
            row = plus[a]
            for b in frontier:
                c = row[b]
                if c not in known:
                    known.add(c)
                    nxt.append(c)
                c = plus[b][a]
                if c not in known:
                    known.add(c)
                    nxt.append(c)
        frontier = nxt
    return frozenset(known)


def omega_images(alg: CayleyAlgebra, s: Iterable[int]) -> set[int]:
    """All omega(tuple) with tuple entries from s (nullary symbols contribute
    their constant unconditionally)."""
    base = sorted(set(s))
    out: set[int] = set()
    for sym in alg.sig.omega:
        if sym.arity == 0:
            out.add(alg.tables[sym.name])
            continue
        table = alg.tables[sym.name]
        for tup in itertools.product(base, repeat=sym.arity):
            t = table
            for a in tup:
                t = t[a]
            out.add(t)
    return out


def tau_step(alg: CayleyAlgebra, s: Iterable[int]) -> ElementSet:
    """One closure step: subgroup generated by s together with its omega images."""
    s = set(s)
    return subgroup_closure(alg, s | omega_images(alg, s))


def sigma_closure(alg: CayleyAlgebra, s: Iterable[int]) -> ElementSet:
    """Subalgebra generated by s: iterate tau_step to its fixpoint."""
    cur = frozenset(s)
    while True:
        nxt = tau_step(alg, cur)
        if nxt == cur:
            return cur
        cur = nxt


def tau_iteration_count(alg: CayleyAlgebra, s: Iterable[int]) -> int:
    """Number of tau_step applications until the first one that changes nothing."""
    cur = frozenset(s)
    count = 0
    while True:
        nxt = tau_step(alg, cur)
        count += 1
        if nxt == cur:
            return count
        cur = nxt


def subalgebra_closure_worklist(alg: CayleyAlgebra, s: Iterable[int]) -> ElementSet:
    """Independent subalgebra closure: saturate one element at a time under
    every operation of the full signature."""
    tables = alg.tables
    syms = [(sym.name, sym.arity) for sym in alg.sig.symbols]
    known = {alg.zero}
    known.update(s)
    for name, arity in syms:
        if arity == 0:
            known.add(tables[name])
    queue = list(known)
    while queue:
        x = queue.pop()
        for name, arity in syms:
            if arity == 0:
                continue
            table = tables[name]
            if arity == 1:
                y = table[x]
                if y not in known:
                    known.add(y)
                    queue.append(y)
                continue
            # x in each argument slot, all other slots over current elements
            for slot in range(arity):
                pools = [[x] if i == slot else list(known) for i in range(arity)]
                for tup in itertools.product(*pools):
                    t = table
                    for a in tup:
                        t = t[a]
                    if t not in known:
                        known.add(t)
                        queue.append(t)
    return frozenset(known)


def is_subgroup(alg: CayleyAlgebra, s: ElementSet) -> bool:
    plus = alg.tables["+"]
    negt = alg.tables["-"]
    if alg.zero not in s:
        return False
    return all(negt[a] in s for a in s) and all(plus[a][b] in s for a in s for b in s)


def is_normal_subgroup(alg: CayleyAlgebra, s: ElementSet) -> bool:
    plus = alg.tables["+"]
    negt = alg.tables["-"]
    if not is_subgroup(alg, s):
        return False
    return all(
        plus[plus[negt[h]][a]][h] in s for h in range(alg.size) for a in s
    )


def absorption_images(alg: CayleyAlgebra, s: Iterable[int]) -> set[int]:
    """omega(H,...,a,...,H) over nonnullary omega, every slot, every a in s."""
    out: set[int] = set()
    everything = range(alg.size)
    for sym in alg.sig.omega_nonnullary:
        table = alg.tables[sym.name]
        for slot in range(sym.arity):
            pools = [list(s) if i == slot else list(everything) for i in range(sym.arity)]
            for tup in itertools.product(*pools):
                t = table
                for a in tup:
                    t = t[a]
                out.add(t)
    return out


def is_ideal(alg: CayleyAlgebra, s: ElementSet) -> bool:
    """Normal subgroup of Add H absorbing every nonnullary omega in every slot."""
    return is_normal_subgroup(alg, s) and absorption_images(alg, s) <= set(s)


def normal_closure(alg: CayleyAlgebra, s: Iterable[int],
                   gens: tuple[int, ...] | None = None) -> ElementSet:
    """Smallest normal subgroup containing s; conjugates by +-(additive
    generators) and recloses until stable."""
    plus = alg.tables["+"]
    negt = alg.tables["-"]
    if gens is None:
        gens = additive_generators_greedy(alg)
    conj_by = [g for g in gens] + [negt[g] for g in gens]
    cur = subgroup_closure(alg, s)
    while True:
        extra = {plus[plus[negt[g]][a]][g] for g in conj_by for a in cur}
        if extra <= cur:
            return cur
        cur = subgroup_closure(alg, cur | extra)


def ideal_closure(alg: CayleyAlgebra, t: Iterable[int]) -> ElementSet:
    """Smallest ideal containing t: alternate normal closure and absorption."""
    gens = additive_generators_greedy(alg)
    cur = subgroup_closure(alg, t)
    while True:
        nc = normal_closure(alg, cur, gens)
        absorbed = absorption_images(alg, nc)
        nxt = subgroup_closure(alg, nc | absorbed)
        if nxt == cur:
            return cur
        cur = nxt


def generates_additively(alg: CayleyAlgebra, s: Iterable[int]) -> bool:
    return len(subgroup_closure(alg, s)) == alg.size


def generates_sigma(alg: CayleyAlgebra, s: Iterable[int]) -> bool:
    return len(sigma_closure(alg, s)) == alg.size


def satisfies_basis(alg: CayleyAlgebra, basis) -> bool:
    """Direct table evaluation of every identity of a basis (duck-typed:
    anything with an .identities tuple works)."""
    return all(identity_holds(alg, ident) for ident in basis.identities)


def additive_generators_greedy(alg: CayleyAlgebra) -> tuple[int, ...]:
    """A small additive generating tuple found greedily (largest growth first)."""
    if alg.additive_generators is not None and generates_additively(
        alg, alg.additive_generators
    ):
        return alg.additive_generators
    return _greedy_generators(alg, subgroup_closure)


def sigma_generators_greedy(alg: CayleyAlgebra) -> tuple[int, ...]:
    """A small generating tuple for the whole signature, found greedily."""
    if alg.sigma_generators is not None and generates_sigma(alg, alg.sigma_generators):
        return alg.sigma_generators
    return _greedy_generators(alg, sigma_closure)


def _greedy_generators(alg: CayleyAlgebra, closure: Callable) -> tuple[int, ...]:
    gens: list[int] = []
    have = closure(alg, gens)
    while len(have) < alg.size:
        best, best_gain = None, 0
        for x in range(alg.size):
            if x in have:
                continue
            gain = len(closure(alg, list(gens) + [x]))
            if gain > best_gain:
                best, best_gain = x, gain
        gens.append(best)
        have = closure(alg, gens)
    return tuple(gens)


def all_subgroups(alg: CayleyAlgebra, cap: int = SUBGROUP_CAP) -> list[ElementSet]:
    """Every subgroup of Add H, found by closing each subgroup with one more element."""
    trivial = subgroup_closure(alg, ())
    found = {trivial}
    frontier = [trivial]
    while frontier:
        nxt = []
        for g in frontier:
            for x in range(alg.size):
                if x in g:
                    continue
                h = subgroup_closure(alg, g | {x})
                if h not in found:
                    found.add(h)
                    nxt.append(h)
                    if len(found) > cap:
                        raise BudgetExceededError(
                            f"{alg.name}: more than {cap} subgroups"
                        )
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def max_chain_length(alg: CayleyAlgebra, cap: int = SUBGROUP_CAP) -> int:
    """Number of strict inclusions in the longest subgroup chain of Add H."""
    subs = all_subgroups(alg, cap)
    longest: dict[ElementSet, int] = {}
    for g in subs:  # sorted by size, so proper subgroups come first
        best = 0
        for k, lk in longest.items():
            if len(k) < len(g) and k < g:
                best = max(best, lk + 1)
        longest[g] = best
    return longest[max(subs, key=len)]


def all_ideals(alg: CayleyAlgebra, cap: int = SUBGROUP_CAP) -> list[ElementSet]:
    return [s for s in all_subgroups(alg, cap) if is_ideal(alg, s)]


def phi_map_names(alg: CayleyAlgebra, m: int) -> list[str]:
    """Deterministic name order: chi_1..chi_m, then psi per omega symbol in
    signature order, per slot, per filler tuple in lexicographic order."""
    names = [f"chi_{i}" for i in range(1, m + 1)]
    for sym in alg.sig.omega_nonnullary:
        for j in range(1, sym.arity + 1):
            for d in itertools.product(range(1, m + 1), repeat=sym.arity - 1):
                suffix = "-".join(map(str, d))
                names.append(f"psi_{sym.name}_{j}" + (f"_{suffix}" if d else ""))
    return names


def phi_maps(alg: CayleyAlgebra, g: tuple[int, ...]) -> list[tuple[str, np.ndarray]]:
    """Ground-truth unary maps of the derived signature for the tuple g:
    chi_i is conjugation by g_i, psi fixes all but one slot of omega with
    entries of g."""
    m = len(g)
    plus = alg.np_table("+")
    negt = alg.np_table("-")
    idx = np.arange(alg.size)
    out: list[tuple[str, np.ndarray]] = []
    for i in range(1, m + 1):
        gi = g[i - 1]
        out.append((f"chi_{i}", plus[plus[negt[gi], idx], gi]))
    for sym in alg.sig.omega_nonnullary:
        table = alg.np_table(sym.name)
        for j in range(1, sym.arity + 1):
            for d in itertools.product(range(1, m + 1), repeat=sym.arity - 1):
                args: list = []
                fill = list(d)
                for slot in range(1, sym.arity + 1):
                    if slot == j:
                        args.append(idx)
                    else:
                        args.append(g[fill.pop(0) - 1])
                out.append(
                    (
                        f"psi_{sym.name}_{j}" + (f"_{'-'.join(map(str, d))}" if d else ""),
                        table[tuple(args)],
                    )
                )
    return out


def is_phi_subgroup(alg: CayleyAlgebra, g: tuple[int, ...], s: ElementSet) -> bool:
    """Subgroup closed under every derived unary map for g."""
    if not is_subgroup(alg, s):
        return False
    for _, mp in phi_maps(alg, g):
        if any(int(mp[a]) not in s for a in s):
            return False
    return True


def phi_subgroups(alg: CayleyAlgebra, g: tuple[int, ...],
                  cap: int = SUBGROUP_CAP) -> list[ElementSet]:
    return [s for s in all_subgroups(alg, cap) if is_phi_subgroup(alg, g, s)]


# ---------------------------------------------------------------------------
# all-subset sweeps (carrier size <= 16; subsets as int64 bitmasks)

_SUBGROUP_MASK_CACHE: dict[int, tuple[CayleyAlgebra, list[int]]] = {}


def _check_vec_size(alg: CayleyAlgebra):
    if alg.size > 16:
        raise BudgetExceededError(f"{alg.name}: all-subset sweep needs size <= 16")


def all_masks(alg: CayleyAlgebra) -> np.ndarray:
    _check_vec_size(alg)
    return np.arange(1 << alg.size, dtype=np.int64)


def set_to_mask(s: Iterable[int]) -> int:
    out = 0
    for a in s:
        out |= 1 << a
    return out


def mask_to_set(mask: int) -> ElementSet:
    return frozenset(a for a in range(mask.bit_length()) if (mask >> a) & 1)


def _subgroup_masks(alg: CayleyAlgebra) -> list[int]:
    key = id(alg)
    hit = _SUBGROUP_MASK_CACHE.get(key)
    if hit is not None and hit[0] is alg:
        return hit[1]
    masks = [set_to_mask(s) for s in all_subgroups(alg)]
    _SUBGROUP_MASK_CACHE[key] = (alg, masks)
    return masks


def vec_subgroup_closure(alg: CayleyAlgebra, masks: np.ndarray) -> np.ndarray:
    """Closure of every subset mask: intersect all subgroups containing it
    (the subgroup lattice is closed under intersection)."""
    out = np.full_like(masks, (1 << alg.size) - 1)
    for g in _subgroup_masks(alg):
        contains = (masks & ~np.int64(g)) == 0
        out[contains] &= np.int64(g)
    return out


def vec_omega_images(alg: CayleyAlgebra, masks: np.ndarray) -> np.ndarray:
    """Bitmask of omega images of each subset (nullary constants always present)."""
    out = np.zeros_like(masks)
    for sym in alg.sig.omega:
        if sym.arity == 0:
            out |= np.int64(1 << alg.tables[sym.name])
            continue
        table = alg.tables[sym.name]
        for tup in itertools.product(range(alg.size), repeat=sym.arity):
            sel = np.ones_like(masks)
            for a in tup:
                sel &= masks >> a
            t = table
            for a in tup:
                t = t[a]
            out |= np.where((sel & 1).astype(bool), np.int64(1 << t), np.int64(0))
    return out


def vec_tau_step(alg: CayleyAlgebra, masks: np.ndarray) -> np.ndarray:
    return vec_subgroup_closure(alg, masks | vec_omega_images(alg, masks))


def vec_sigma_closure_with_rounds(alg: CayleyAlgebra,
                                  masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sigma closure of every mask and the per-mask tau iteration count."""
    cur = masks.copy()
    rounds = np.zeros_like(masks)
    active = np.ones(masks.shape, dtype=bool)
    while active.any():
        nxt = vec_tau_step(alg, cur)
        rounds[active] += 1
        active &= nxt != cur
        cur = nxt
    return cur, rounds


def vec_subalgebra_worklist(alg: CayleyAlgebra, masks: np.ndarray) -> np.ndarray:
    """Independent all-subset closure: saturate under the full signature
    one image at a time, no subgroup-lattice shortcut."""
    plus = alg.tables["+"]
    negt = alg.tables["-"]
    cur = masks | np.int64(1 << alg.zero)
    while True:
        nxt = cur.copy()
        for a in range(alg.size):
            has_a = ((cur >> a) & 1).astype(bool)
            nxt |= np.where(has_a, np.int64(1 << negt[a]), np.int64(0))
            for b in range(alg.size):
                both = has_a & (((cur >> b) & 1).astype(bool))
                nxt |= np.where(both, np.int64(1 << plus[a][b]), np.int64(0))
        nxt |= vec_omega_images(alg, nxt)
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt
