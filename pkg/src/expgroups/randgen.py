"""Random subsums and the randomized additive-generator algorithm.

Everything here talks to the hidden algebra only through the blackbox
session protocols (no table access, no handle decoding).  The batch
variants run many independent trials in lockstep on one batch session;
this is faithful because control flow never depends on query answers,
only on the public parameters (n, k, signature shape, tuple lengths).

A subsum b1*g1 + ... + bm*gm is evaluated chunk-wise: the tuple columns
are cut into chunks of SUBSET_CHUNK, the 2^q prefix-ordered subset sums
of each chunk are computed once per lane and shared by all subsums of the
call, each subsum selects one entry per chunk by its coin nibble, and the
selections fold in a balanced tree.  Associativity keeps every value
equal to the plain left-to-right sum over the chosen columns in index
order, so the distribution is exactly that of independent fair-coin
subsums.  subsum_budget() states the exact query accounting the tests
assert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .blackbox import Handle, ScalarLaneBatch

FOLD_BLOCK = 1024
SUBSET_CHUNK = 4


class BadConstantError(ValueError):
    """The failure-rate constant c must exceed 1."""


def choose_k(c: float) -> int:
    """Least k >= 3 with c <= e^((1 - 2/k)^2 * k / 4)."""
    if not c > 1.0:
        raise BadConstantError(f"need c > 1, got {c}")
    k = 3
    while c > math.exp((1.0 - 2.0 / k) ** 2 * k / 4.0):
        k += 1
    return k


def subproduct_failure_bound(k: int, l: int) -> float:
    """Upper bound on Pr[k*l random subsums fail to generate], chain length l."""
    return math.exp(-((1.0 - 2.0 / k) ** 2) * k * l / 4.0)


@dataclass(frozen=True)
class GenParams:
    """Failure constant c > 1 and optional explicit subsum multiplier k."""

    c: float = 2.0
    k: int | None = None

    def resolved_k(self) -> int:
        if self.k is not None:
            if self.k < 3:
                raise BadConstantError(f"k must be >= 3, got {self.k}")
            return self.k
        return choose_k(self.c)

    def failure_bound(self, n: int, runs: int = 1) -> float:
        """runs * n / c^n, the guarantee after `runs` chained generation runs."""
        if n == 0:
            return 0.0
        return runs * n / self.c ** n


def subsum_budget(m: int, count: int) -> dict:
    """Exact per-lane query counts of batch_random_subsums over m columns."""
    full, tail = divmod(m, SUBSET_CHUNK)
    chunks = full + (1 if tail else 0)
    shared = full * (2 ** SUBSET_CHUNK - 1) + (2 ** tail - 1 if tail else 0)
    return {"zero": chunks + count, "plus": shared + count * chunks}


def random_subsum(session, handles: list[Handle], rng) -> Handle:
    """Scalar contract: left-to-right sum of a uniform random subset.

    Consumes exactly len(handles) coin bits; the empty subsum queries 0.
    """
    bits = rng.integers(0, 2, size=len(handles))
    acc = None
    for b, h in zip(bits, handles):
        if not b:
            continue
        acc = h if acc is None else session.query_op("+", acc, h)
    return session.query_op("0") if acc is None else acc


def _chunk_subset_sums(batch, cols: np.ndarray) -> np.ndarray:
    """All 2^q subset sums of each q-column chunk; cols is (width, nch, q).

    Entry [lane, chunk, idx] is the sum of the chunk columns {j: bit j of
    idx set} in increasing j order (the doubling construction appends each
    column on the right, which is exactly prefix order).
    """
    width, nch, q = cols.shape
    cur = batch.op("0", (), shape=(width, nch))[:, :, None]
    for j in range(q):
        cur = np.concatenate(
            [cur, batch.op("+", (cur, cols[:, :, j:j + 1]))], axis=2)
    return cur


@lru_cache(maxsize=64)
def _gather_base(width: int, nch: int, entries: int) -> np.ndarray:
    """Flat offsets of the (lane, chunk) rows of a subset-sum table."""
    lanes = np.arange(width, dtype=np.int32)[:, None, None] * (nch * entries)
    chunks = np.arange(nch, dtype=np.int32)[None, None, :] * entries
    return lanes + chunks


def batch_random_subsums(batch, g: np.ndarray, count: int, rng) -> np.ndarray:
    """count independent random subsums of g per lane; g is (width, m) bits.

    Returns (width, count).  One random byte per (lane, subsum, chunk)
    supplies the selection nibble; its low bits are the fair coins of that
    chunk's columns.  Shared subset-sum tables make the cost per extra
    subsum one gather plus ceil(m/SUBSET_CHUNK) additions instead of m.
    """
    width, m = g.shape
    acc = batch.op("0", (), shape=(width, count))
    for start in range(0, m, FOLD_BLOCK):
        block = g[:, start:start + FOLD_BLOCK]
        nfull, tail = divmod(block.shape[1], SUBSET_CHUNK)
        parts = []
        if nfull:
            parts.append(block[:, :nfull * SUBSET_CHUNK]
                         .reshape(width, nfull, SUBSET_CHUNK))
        if tail:
            parts.append(block[:, nfull * SUBSET_CHUNK:]
                         .reshape(width, 1, tail))
        tables = [_chunk_subset_sums(batch, cols) for cols in parts]
        masks = np.concatenate(
            [np.full(t.shape[1], t.shape[2] - 1, dtype=np.uint8) for t in tables])
        nch_all = len(masks)
        raw = np.frombuffer(rng.bytes(width * count * nch_all), dtype=np.uint8)
        sel = raw.reshape(width, count, nch_all) & masks[None, None, :]
        picked = []
        offset = 0
        for tab in tables:
            nch, entries = tab.shape[1], tab.shape[2]
            flat = _gather_base(width, nch, entries) + sel[:, :, offset:offset + nch]
            picked.append(tab.reshape(-1).take(flat))
            offset += nch
        level = picked[0] if len(picked) == 1 else np.concatenate(picked, axis=2)
        while level.shape[2] > 1:
            length = level.shape[2]
            even = length - (length % 2)
            paired = batch.op("+", (level[:, :, 0:even:2], level[:, :, 1:even:2]))
            if length % 2:
                paired = np.concatenate([paired, level[:, :, length - 1:]], axis=2)
            level = paired
        acc = batch.op("+", (acc, level[:, :, 0]))
    return acc


def batch_omega_images(batch, r: np.ndarray) -> list[np.ndarray]:
    """All omega images of all tuples over r, per symbol in signature order.

    r is (width, t); each returned array is (width, t**arity) with tuple
    arguments in lexicographic (row-major) order; nullary symbols give one
    column.
    """
    width, t = r.shape
    cols = []
    for name, arity in batch.omega_symbols():
        if arity == 0:
            cols.append(batch.op(name, (), shape=(width, 1)))
            continue
        args = []
        for slot in range(arity):
            shape = [width] + [1] * arity
            shape[1 + slot] = t
            args.append(r.reshape(tuple(shape)))
        out = batch.op(name, tuple(args))
        cols.append(out.reshape(width, t ** arity))
    return cols


def additive_generating_system(batch, n: int, s: np.ndarray, params: GenParams,
                               rng, trace: list | None = None) -> np.ndarray:
    """n rounds of (k*n subsums, then all omega images of them) per lane.

    s is (width, m0) handle bits of a signature-generating tuple.  Returns
    (width, m_n) handle bits; with probability >= 1 - n/c^n per lane the
    output additively generates the hidden algebra's group reduct.  Every
    output element always lies in the signature-closure of s.
    """
    k = params.resolved_k()
    current = s
    for _ in range(n):
        subsums = batch_random_subsums(batch, current, k * n, rng)
        current = np.concatenate([subsums] + batch_omega_images(batch, subsums), axis=1)
        if trace is not None:
            trace.append(current)
    return current


def reduce_generating_system(batch, n: int, g: np.ndarray, params: GenParams,
                             rng) -> np.ndarray:
    """k*n random subsums of g; generates the same subgroup w.h.p.

    Output always lies in the subgroup generated by g; failure probability
    is at most c^(-n).
    """
    k = params.resolved_k()
    return batch_random_subsums(batch, g, k * n, rng)


def round_output_length(k: int, n: int, omega: tuple) -> int:
    t = k * n
    return t + sum(t ** arity for _, arity in omega)


def round_budget(m_in: int, k: int, n: int, omega: tuple) -> dict:
    """Exact per-lane operation-query counts of one round."""
    t = k * n
    sub = subsum_budget(m_in, t)
    return {
        "zero": sub["zero"],
        "plus": sub["plus"],
        "omega": {name: t ** arity if arity else 1 for name, arity in omega},
    }


def run_budget(m0: int, k: int, n: int, omega: tuple) -> dict:
    """Exact per-lane totals over a whole generation run."""
    zero = plus = 0
    om = {name: 0 for name, _ in omega}
    m = m0
    for _ in range(n):
        b = round_budget(m, k, n, omega)
        zero += b["zero"]
        plus += b["plus"]
        for name, cnt in b["omega"].items():
            om[name] += cnt
        m = round_output_length(k, n, omega)
    return {"zero": zero, "plus": plus, "omega": om, "final_length": m}


def amplified_generating_system(batch, n: int, s: np.ndarray, params: GenParams,
                                rng, repeats: int) -> np.ndarray:
    """Concatenate `repeats` independent runs; failure <= (n/c^n)^repeats."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    outs = [additive_generating_system(batch, n, s, params, rng)
            for _ in range(repeats)]
    return np.concatenate(outs, axis=1)


def run_b_single(session, n: int, s: list[Handle], params: GenParams,
                 rng) -> list[Handle]:
    """Scalar-session entry point: one trial through the batch engine."""
    batch = ScalarLaneBatch([session])
    bits = np.array([[h.bits for h in s]], dtype=np.int64).reshape(1, len(s))
    out = additive_generating_system(batch, n, bits, params, rng)
    return [Handle(int(b), session.n) for b in out[0]]


def reduce_single(session, n: int, g: list[Handle], params: GenParams,
                  rng) -> list[Handle]:
    batch = ScalarLaneBatch([session])
    bits = np.array([[h.bits for h in g]], dtype=np.int64).reshape(1, len(g))
    out = reduce_generating_system(batch, n, bits, params, rng)
    return [Handle(int(b), session.n) for b in out[0]]
