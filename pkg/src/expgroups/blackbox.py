"""Black-box access to a hidden expanded group through salted bit strings.

A handle is an n-bit string: the low payload bits encode an element index,
the high bits carry a salt resampled on every oracle answer, so one
element surfaces under many strings and string identity carries no extra
information.  Algorithms may compare handles (query_equal) and apply
signature operations (query_op); nothing else about the hidden algebra is
observable.  decode_for_test breaks the abstraction and exists for tests
and harness verification only; a lint test keeps the algorithm modules
away from it and from the explicit-table modules.

Two session kinds implement one batch protocol (lane axis 0, integer bit
arrays):

- Oracle is the scalar contract (Handle in, Handle out, exact per-query
  counters); ScalarLaneBatch adapts a list of scalar sessions to the
  batch protocol and serves as the reference route.
- VectorOracle runs N independent lockstep sessions on numpy arrays.
  The generation algorithms never branch on query answers (control flow
  depends only on n, k and signature shape), so lockstep execution is
  faithful; tests assert decoded-output equality against the scalar route
  under identical coin streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import truth
from .algebras import CayleyAlgebra

MAX_PAYLOAD_BITS = 20


class InvalidHandleError(ValueError):
    """A handle's bits or length do not belong to this session."""


class ArityMismatchError(ValueError):
    """query_op got the wrong number of arguments."""


class UnknownSymbolError(ValueError):
    """query_op got a symbol the session's signature does not provide."""


class SizeOverflowError(ValueError):
    """The carrier needs more payload bits than the configured cap."""


def payload_bits_for(size: int) -> int:
    """Bits needed to address the carrier; at least 1 even for one element."""
    return max(1, int(size - 1).bit_length())


@dataclass(frozen=True)
class Encoding:
    """Fixed (element index, salt) -> bit-string packing for one session."""

    size: int
    payload_bits: int
    salt_bits: int

    @property
    def n(self) -> int:
        return self.payload_bits + self.salt_bits

    def encode(self, index: int, salt: int) -> int:
        return (salt << self.payload_bits) | index

    def decode(self, bits: int) -> int:
        if not 0 <= bits < (1 << self.n):
            raise InvalidHandleError(f"bits {bits} outside {self.n}-bit strings")
        index = bits & ((1 << self.payload_bits) - 1)
        if index >= self.size:
            raise InvalidHandleError(f"payload {index} is not an element index")
        return index


def make_encoding(size: int, salt_bits: int) -> Encoding:
    if salt_bits < 0:
        raise ValueError("salt_bits must be >= 0")
    pb = payload_bits_for(size)
    if pb > MAX_PAYLOAD_BITS:
        raise SizeOverflowError(f"size {size} needs {pb} payload bits (cap {MAX_PAYLOAD_BITS})")
    enc = Encoding(size, pb, salt_bits)
    assert size <= (1 << enc.n)
    return enc


@dataclass(frozen=True)
class Handle:
    """An opaque n-bit string standing for one hidden element."""

    bits: int
    n: int


class Oracle:
    """Scalar black-box session over one hidden algebra."""

    def __init__(self, alg: CayleyAlgebra, salt_bits: int, rng=None,
                 generators: tuple[int, ...] | None = None):
        self._alg = alg
        self.encoding = make_encoding(alg.size, salt_bits)
        self._rng = np.random.default_rng(rng)
        self._symbols = {s.name: s.arity for s in alg.sig.symbols}
        self._omega = tuple((s.name, s.arity) for s in alg.sig.omega)
        self.equality_queries = 0
        self.operation_queries = {name: 0 for name in self._symbols}
        if generators is None:
            generators = truth.sigma_generators_greedy(alg)
        self.generator_indices = tuple(generators)
        self.generators = [self._fresh(i) for i in generators]

    @property
    def n(self) -> int:
        return self.encoding.n

    def omega_symbols(self) -> tuple[tuple[str, int], ...]:
        return self._omega

    def _fresh(self, index: int) -> Handle:
        salt = 0
        if self.encoding.salt_bits:
            salt = int(self._rng.integers(0, 1 << self.encoding.salt_bits))
        return Handle(self.encoding.encode(index, salt), self.encoding.n)

    def _decode(self, h: Handle) -> int:
        if not isinstance(h, Handle) or h.n != self.encoding.n:
            raise InvalidHandleError(f"handle {h!r} does not belong to this session")
        return self.encoding.decode(h.bits)

    def query_equal(self, a: Handle, b: Handle) -> bool:
        self.equality_queries += 1
        return self._decode(a) == self._decode(b)

    def query_op(self, name: str, *args: Handle) -> Handle:
        arity = self._symbols.get(name)
        if arity is None:
            raise UnknownSymbolError(f"unknown symbol {name!r}")
        if len(args) != arity:
            raise ArityMismatchError(f"{name!r} takes {arity} arguments, got {len(args)}")
        idxs = [self._decode(a) for a in args]
        self.operation_queries[name] += 1
        return self._fresh(self._alg.op(name, *idxs))

    def decode_for_test(self, h: Handle) -> int:
        """Test-only: reveal the element index behind a handle."""
        return self._decode(h)

    @property
    def query_counts(self) -> dict:
        return {
            "equality": self.equality_queries,
            "operations": dict(self.operation_queries),
        }


def make_oracle(alg: CayleyAlgebra, salt_bits: int, seed=None,
                generators: tuple[int, ...] | None = None) -> tuple[Oracle, list[Handle]]:
    """Session plus handles of a generating tuple (computed when not given)."""
    session = Oracle(alg, salt_bits, rng=seed, generators=generators)
    return session, list(session.generators)


def distinct_handles(session, handles: list[Handle]) -> list[Handle]:
    """Representatives with pairwise-distinct elements (quadratic equality scan)."""
    kept: list[Handle] = []
    for h in handles:
        if not any(session.query_equal(h, k) for k in kept):
            kept.append(h)
    return kept


# ---------------------------------------------------------------------------
# batch protocol


def _fitting_dtype(bits: int):
    for dt in (np.uint8, np.uint16, np.uint32):
        if bits <= np.dtype(dt).itemsize * 8:
            return dt
    return np.int64


class VectorOracle:
    """N independent lockstep sessions; handles are arrays of the smallest
    unsigned integer dtype that holds an n-bit string, lane axis first.
    Results of masked positions in op(where=...) are valid handles but
    unspecified; callers merge with their own mask.  Counters count only
    masked positions, per lane."""

    def __init__(self, alg: CayleyAlgebra, salt_bits: int, width: int, rng=None):
        self._alg = alg
        self.encoding = make_encoding(alg.size, salt_bits)
        self.width = width
        self._rng = np.random.default_rng(rng)
        self.dtype = _fitting_dtype(self.encoding.n)
        pb = self.encoding.payload_bits
        self._payload_bits = pb
        self._payload_mask = self.dtype((1 << pb) - 1)
        # When handles fit one byte the tables are indexed by raw handle
        # bytes (payload masking baked in), so a binary lookup is one
        # gather at (a << 8) | b into a 64K table; otherwise tables are
        # padded to power-of-two extents and indexed by (a << pb) | b on
        # masked payloads.  Pad entries are never reachable from valid
        # handles.
        self._raw_bytes = self.encoding.n <= 8
        side = 256 if self._raw_bytes else 1 << pb
        payload = np.arange(side, dtype=np.int64) & ((1 << pb) - 1)
        valid = payload < alg.size
        safe = np.minimum(payload, alg.size - 1)
        self._tables = {}
        for s in alg.sig.symbols:
            raw = alg.np_table(s.name)
            if s.arity == 0:
                self._tables[s.name] = int(raw)
            elif s.arity == 1:
                full = raw[safe]
                full[~valid] = 0
                self._tables[s.name] = full.astype(self.dtype)
            elif s.arity == 2:
                full = raw[safe[:, None], safe[None, :]]
                full[~valid, :] = 0
                full[:, ~valid] = 0
                self._tables[s.name] = full.astype(self.dtype).ravel()
            else:
                self._tables[s.name] = raw.astype(self.dtype)
        self._idx2_dtype = np.uint16 if self._raw_bytes else _fitting_dtype(2 * pb)
        self._idx2_shift = 8 if self._raw_bytes else pb
        self._arities = {s.name: s.arity for s in alg.sig.symbols}
        self._omega = tuple((s.name, s.arity) for s in alg.sig.omega)
        sb = self.encoding.salt_bits
        self._salt_high = None
        self._salt_lut = None
        if sb and self._raw_bytes:
            # any fixed bits of a random byte are uniform; mask in place
            self._salt_high = np.uint8(((1 << sb) - 1) << pb)
        elif 0 < sb <= 8:
            # one random byte per answer, masked and pre-shifted via a LUT
            self._salt_lut = (
                (np.arange(256, dtype=self.dtype) & ((1 << sb) - 1)) << pb
            )
        self.equality_queries = np.zeros(width, dtype=np.int64)
        self.operation_queries = {
            name: np.zeros(width, dtype=np.int64) for name in self._arities
        }

    @property
    def n(self) -> int:
        return self.encoding.n

    def omega_symbols(self) -> tuple[tuple[str, int], ...]:
        return self._omega

    def _salted(self, idx: np.ndarray) -> np.ndarray:
        sb = self.encoding.salt_bits
        if not sb:
            return idx
        if self._salt_high is not None:
            raw = np.frombuffer(self._rng.bytes(idx.size), dtype=np.uint8)
            return idx | (raw.reshape(idx.shape) & self._salt_high)
        if self._salt_lut is not None:
            raw = np.frombuffer(self._rng.bytes(idx.size), dtype=np.uint8)
            return idx | self._salt_lut[raw].reshape(idx.shape)
        salts = self._rng.integers(0, 1 << sb, size=idx.shape, dtype=np.int64)
        return idx | (salts.astype(self.dtype) << self.encoding.payload_bits)

    def _count(self, counter: np.ndarray, shape, where):
        if where is None:
            counter += math.prod(shape[1:])
        else:
            axes = tuple(range(1, where.ndim))
            counter += where.sum(axis=axes) if axes else where.astype(np.int64)

    def op(self, name: str, args: tuple, shape=None, where=None) -> np.ndarray:
        arity = self._arities.get(name)
        if arity is None:
            raise UnknownSymbolError(f"unknown symbol {name!r}")
        if len(args) != arity:
            raise ArityMismatchError(f"{name!r} takes {arity} arguments, got {len(args)}")
        table = self._tables[name]
        if arity == 0:
            if shape is None:
                shape = (self.width,)
            out = np.full(shape, table, dtype=self.dtype)
        elif arity == 1:
            a = args[0] if self._raw_bytes else args[0] & self._payload_mask
            out = table[a]
            shape = out.shape
        elif arity == 2:
            if self._raw_bytes:
                a, b = args
            else:
                a, b = args[0] & self._payload_mask, args[1] & self._payload_mask
            idx = (a.astype(self._idx2_dtype) << self._idx2_shift) | b
            out = table[idx]
            shape = out.shape
        else:
            decoded = tuple(a & self._payload_mask for a in args)
            out = table[decoded]
            shape = out.shape
        assert shape[0] == self.width
        self._count(self.operation_queries[name], shape, where)
        return self._salted(out)

    def equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        res = (np.asarray(a) & self._payload_mask) == (np.asarray(b) & self._payload_mask)
        self._count(self.equality_queries, np.broadcast_shapes(a.shape, b.shape), None)
        return res

    def broadcast_elements(self, indices: tuple[int, ...]) -> np.ndarray:
        """Fresh handles of the given elements in every lane, shape (width, len)."""
        idx = np.tile(np.asarray(indices, dtype=self.dtype), (self.width, 1))
        return self._salted(idx)

    def decode_for_test(self, arr: np.ndarray) -> np.ndarray:
        """Test/harness-only: element indices behind an array of handles."""
        return np.asarray(arr) & self._payload_mask

    @property
    def ops_total_per_lane(self) -> np.ndarray:
        out = np.zeros(self.width, dtype=np.int64)
        for v in self.operation_queries.values():
            out += v
        return out


class ScalarLaneBatch:
    """Batch protocol over a list of scalar sessions; the slow reference route."""

    def __init__(self, sessions: list[Oracle]):
        if not sessions:
            raise ValueError("need at least one session")
        ns = {s.n for s in sessions}
        if len(ns) != 1:
            raise InvalidHandleError("sessions disagree on encoding length")
        self.sessions = sessions
        self.width = len(sessions)
        self.n = sessions[0].n
        self._omega = sessions[0].omega_symbols()

    def omega_symbols(self):
        return self._omega

    def op(self, name: str, args: tuple, shape=None, where=None) -> np.ndarray:
        if args:
            args = np.broadcast_arrays(*[np.asarray(a, dtype=np.int64) for a in args])
            shape = args[0].shape
        out = np.zeros(shape, dtype=np.int64)
        for pos in np.ndindex(*shape):
            if where is not None and not where[pos]:
                continue
            session = self.sessions[pos[0]]
            hs = [Handle(int(a[pos]), self.n) for a in args]
            out[pos] = session.query_op(name, *hs).bits
        return out

    def equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        out = np.zeros(a.shape, dtype=bool)
        for pos in np.ndindex(*a.shape):
            session = self.sessions[pos[0]]
            out[pos] = session.query_equal(
                Handle(int(a[pos]), self.n), Handle(int(b[pos]), self.n)
            )
        return out

    def decode_for_test(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr)
        out = np.zeros(arr.shape, dtype=np.int64)
        for pos in np.ndindex(*arr.shape):
            out[pos] = self.sessions[pos[0]].decode_for_test(Handle(int(arr[pos]), self.n))
        return out
