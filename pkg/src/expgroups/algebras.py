"""Explicit finite expanded groups stored as dense Cayley tables.

Carriers are index sets {0..size-1}; every operation is a nested tuple
table (int for nullary symbols).  Tables are built from first principles
(modular arithmetic, permutation composition, matrix arithmetic) so they
can serve as independent ground truth for the black-box layer.

Size caps: 4096 elements for signatures of arity <= 2, 64 elements when
any extra symbol has arity >= 3 (exhaustive checks cost size**(arity+1)).
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .terms import OpSymbol, Signature, SignatureMismatchError, validate_signature

MAX_SIZE = 4096
MAX_SIZE_HIGH_ARITY = 64


class NotAGroupError(ValueError):
    """The +/-/0 tables do not form a group."""


class NotDistributiveError(ValueError):
    """Some extra operation fails to distribute over + in some position."""


class UnknownFamilyError(ValueError):
    """build_family got a name it does not know."""


class ParamOutOfRangeError(ValueError):
    """A family parameter or table size is outside the supported range."""


def _tupleize(table, arity: int, size: int, path: str):
    """Convert a nested table to tuples, validating shape and entry range."""
    if arity == 0:
        if not isinstance(table, int) or isinstance(table, bool) or not (0 <= table < size):
            raise ParamOutOfRangeError(f"{path}: nullary table must be an index in [0,{size})")
        return table
    rows = list(table)
    if len(rows) != size:
        raise ParamOutOfRangeError(f"{path}: expected {size} entries, got {len(rows)}")
    return tuple(_tupleize(r, arity - 1, size, f"{path}[{i}]") for i, r in enumerate(rows))


class CayleyAlgebra:
    """A finite expanded group given by dense operation tables.

    Treat instances as immutable: tables are nested tuples and numpy views
    are cached per symbol.  Construction validates shapes and entry ranges
    only; use check_expanded_group / check_distributive for the axioms.
    """

    def __init__(
        self,
        sig: Signature,
        size: int,
        tables: dict,
        name: str = "",
        element_names: Sequence[str] | None = None,
        sigma_generators: tuple[int, ...] | None = None,
        additive_generators: tuple[int, ...] | None = None,
    ):
        validate_signature(sig)
        if size < 1:
            raise ParamOutOfRangeError("carrier must be nonempty")
        max_arity = max((s.arity for s in sig.symbols), default=2)
        cap = MAX_SIZE_HIGH_ARITY if max_arity >= 3 else MAX_SIZE
        if size > cap:
            raise ParamOutOfRangeError(f"size {size} exceeds cap {cap} for arity {max_arity}")
        self.sig = sig
        self.size = size
        self.tables = {}
        for sym in sig.symbols:
            if sym.name not in tables:
                raise SignatureMismatchError(f"missing table for symbol {sym.name!r}")
            self.tables[sym.name] = _tupleize(tables[sym.name], sym.arity, size, sym.name)
        extra = set(tables) - set(self.tables)
        if extra:
            raise SignatureMismatchError(f"tables for undeclared symbols: {sorted(extra)}")
        self.name = name or f"algebra<{size}>"
        self.element_names = tuple(element_names) if element_names is not None else None
        if self.element_names is not None and len(self.element_names) != size:
            raise ParamOutOfRangeError("element_names length must equal size")
        self.sigma_generators = sigma_generators
        self.additive_generators = additive_generators
        self._np_cache: dict[str, np.ndarray] = {}

    @property
    def zero(self) -> int:
        return self.tables["0"]

    def op(self, name: str, *args: int) -> int:
        t = self.tables[name]
        arity = self.sig.by_name(name).arity
        if len(args) != arity:
            raise SignatureMismatchError(f"{name!r} takes {arity} arguments, got {len(args)}")
        for a in args:
            t = t[a]
        return t

    def plus(self, a: int, b: int) -> int:
        return self.tables["+"][a][b]

    def negate(self, a: int) -> int:
        return self.tables["-"][a]

    def np_table(self, name: str) -> np.ndarray:
        """Cached int64 array view of one operation table."""
        if name not in self._np_cache:
            arity = self.sig.by_name(name).arity
            arr = np.asarray(self.tables[name], dtype=np.int64)
            assert arr.shape == (self.size,) * arity
            self._np_cache[name] = arr
        return self._np_cache[name]

    def index_of(self, element_name: str) -> int:
        if self.element_names is None:
            raise ValueError(f"{self.name} has no element names")
        return self.element_names.index(element_name)

    def __repr__(self):
        omega = ",".join(f"{s.name}/{s.arity}" for s in self.sig.omega)
        return f"CayleyAlgebra({self.name}, size={self.size}, omega=[{omega}])"


def check_expanded_group(alg: CayleyAlgebra) -> None:
    """Exhaustively verify the +/-/0 tables form a group; raise with a witness."""
    n = alg.size
    plus = alg.np_table("+")
    negt = alg.np_table("-")
    z = alg.zero
    idx = np.arange(n)
    bad = np.nonzero(plus[z] != idx)[0]
    if bad.size:
        raise NotAGroupError(f"0 is not a left identity: 0+{bad[0]} = {plus[z][bad[0]]}")
    bad = np.nonzero(plus[:, z] != idx)[0]
    if bad.size:
        raise NotAGroupError(f"0 is not a right identity: {bad[0]}+0 = {plus[bad[0]][z]}")
    bad = np.nonzero(plus[idx, negt] != z)[0]
    if bad.size:
        a = bad[0]
        raise NotAGroupError(f"-{a} is not a right inverse: {a}+(-{a}) = {plus[a][negt[a]]}")
    bad = np.nonzero(plus[negt, idx] != z)[0]
    if bad.size:
        a = bad[0]
        raise NotAGroupError(f"-{a} is not a left inverse")
    for a in range(n):
        lhs = plus[plus[a], :]
        rhs = plus[a, plus]
        if not np.array_equal(lhs, rhs):
            b, c = np.argwhere(lhs != rhs)[0]
            raise NotAGroupError(
                f"associativity fails: ({a}+{b})+{c} = {lhs[b][c]} but {a}+({b}+{c}) = {rhs[b][c]}"
            )


def check_distributive(alg: CayleyAlgebra) -> None:
    """Verify every nonnullary extra operation distributes over + in each position."""
    plus = alg.np_table("+")
    for sym in alg.sig.omega:
        if sym.arity == 0:
            continue
        table = alg.np_table(sym.name)
        for pos in range(sym.arity):
            m = np.moveaxis(table, pos, 0)
            # m[x] is the slice with position pos fixed to x; compare
            # omega(..., x+y, ...) against omega(...,x,...) + omega(...,y,...).
            lhs = m[plus]
            rhs = plus[m[:, None], m[None, :]]
            if not np.array_equal(lhs, rhs):
                flat = np.argwhere(lhs != rhs)[0]
                x, y, rest = flat[0], flat[1], tuple(flat[2:])
                raise NotDistributiveError(
                    f"{sym.name} not distributive in position {pos + 1}: "
                    f"x={x}, y={y}, other args {rest}"
                )


def _encode_tables(plus, neg, zero_idx, omega_tables, **kw) -> dict:
    tables = {"+": plus, "-": neg, "0": zero_idx}
    tables.update(omega_tables)
    return tables


def cyclic(n: int) -> CayleyAlgebra:
    """The cyclic group Z_n with no extra operations."""
    if n < 1 or n > MAX_SIZE:
        raise ParamOutOfRangeError(f"cyclic: n={n} out of range")
    plus = [[(i + j) % n for j in range(n)] for i in range(n)]
    negt = [(-i) % n for i in range(n)]
    return CayleyAlgebra(
        Signature(),
        n,
        {"+": plus, "-": negt, "0": 0},
        name=f"Z{n}",
        element_names=[str(i) for i in range(n)],
        sigma_generators=(1,) if n > 1 else (),
        additive_generators=(1,) if n > 1 else (),
    )


def _perm_algebra(perms: list[tuple[int, ...]], name: str, names: list[str],
                  gens: tuple[int, ...]) -> CayleyAlgebra:
    """Group algebra from a closed list of permutations; a+b composes a after b."""
    index = {p: i for i, p in enumerate(perms)}
    npts = len(perms[0])
    plus = [
        [index[tuple(p[q[x]] for x in range(npts))] for q in perms]
        for p in perms
    ]
    negt = [0] * len(perms)
    for i, p in enumerate(perms):
        inv = [0] * npts
        for x in range(npts):
            inv[p[x]] = x
        negt[i] = index[tuple(inv)]
    return CayleyAlgebra(
        Signature(),
        len(perms),
        {"+": plus, "-": negt, "0": index[tuple(range(npts))]},
        name=name,
        element_names=names,
        sigma_generators=gens,
        additive_generators=gens,
    )


def dihedral(n: int) -> CayleyAlgebra:
    """The dihedral group D_n (2n symmetries of the regular n-gon) as permutations.

    Element e*n + i is r^i f^e where r rotates x -> x+1 (mod n) and f
    reflects x -> -x (mod n); the identity has index 0.  Needs n >= 3:
    below that the reflection is not a distinct permutation.
    """
    if n < 3 or 2 * n > MAX_SIZE:
        raise ParamOutOfRangeError(f"dihedral: n={n} out of range (min 3)")
    perms = []
    names = []
    for e in (0, 1):
        for i in range(n):
            perms.append(tuple((i + (x if e == 0 else -x)) % n for x in range(n)))
            names.append(f"r{i}" + ("f" if e else ""))
    alg = _perm_algebra(perms, f"D{n}", names, (1 % (2 * n), n))
    return alg


def symmetric(n: int) -> CayleyAlgebra:
    """The symmetric group S_n (n <= 5), permutations in lexicographic order."""
    if n < 1 or n > 5:
        raise ParamOutOfRangeError(f"symmetric: n={n} out of range (max 5)")
    perms = sorted(itertools.permutations(range(n)))
    names = ["".join(map(str, p)) for p in perms]
    if n == 1:
        gens: tuple[int, ...] = ()
    elif n == 2:
        gens = (1,)
    else:
        index = {p: i for i, p in enumerate(perms)}
        swap = tuple([1, 0] + list(range(2, n)))
        cyc = tuple(list(range(1, n)) + [0])
        gens = (index[swap], index[cyc])
    return _perm_algebra(list(perms), f"S{n}", names, gens)


MUL = OpSymbol("mul", 2)
ONE = OpSymbol("one", 0)


def ring_mod_n(n: int, with_one: bool = False) -> CayleyAlgebra:
    """The ring Z_n with multiplication, optionally with the constant 1."""
    if n < 1 or n > MAX_SIZE:
        raise ParamOutOfRangeError(f"ring_mod_n: n={n} out of range")
    plus = [[(i + j) % n for j in range(n)] for i in range(n)]
    negt = [(-i) % n for i in range(n)]
    mul = [[(i * j) % n for j in range(n)] for i in range(n)]
    omega = (MUL, ONE) if with_one else (MUL,)
    tables = {"+": plus, "-": negt, "0": 0, "mul": mul}
    if with_one:
        tables["one"] = 1 % n
    return CayleyAlgebra(
        Signature(omega),
        n,
        tables,
        name=f"Z{n}ring" + ("1" if with_one else ""),
        element_names=[str(i) for i in range(n)],
        sigma_generators=(1 % n,) if n > 1 else (),
        additive_generators=(1 % n,) if n > 1 else (),
    )


def _matrix_tables(mats: np.ndarray, p: int, positions: list[tuple[int, int]]):
    """Dense +/-/mul tables for a list of matrices closed under the operations."""
    size = mats.shape[0]
    weights = {}
    for d, (r, c) in enumerate(positions):
        weights[(r, c)] = p ** d

    def enc(batch: np.ndarray) -> np.ndarray:
        out = np.zeros(batch.shape[:-2], dtype=np.int64)
        for (r, c), w in weights.items():
            out += batch[..., r, c] * w
        return out

    plus = enc((mats[:, None] + mats[None, :]) % p)
    negt = enc((-mats) % p)
    mul = enc(np.einsum("aij,bjk->abik", mats, mats) % p)
    return plus, negt, mul, enc


def matrix_ring(k: int, p: int, with_one: bool = False) -> CayleyAlgebra:
    """The full matrix ring M_k(Z_p); index = sum of M[r][c] * p**(r*k+c).

    E_rc (the single-unit matrix) therefore has index p**(r*k+c).
    """
    size = p ** (k * k)
    if k < 1 or p < 2 or size > MAX_SIZE:
        raise ParamOutOfRangeError(f"matrix_ring: k={k}, p={p} out of range")
    positions = [(r, c) for r in range(k) for c in range(k)]
    mats = np.zeros((size, k, k), dtype=np.int64)
    for i in range(size):
        for d, (r, c) in enumerate(positions):
            mats[i, r, c] = (i // p ** d) % p
    plus, negt, mul, enc = _matrix_tables(mats, p, positions)
    omega = (MUL, ONE) if with_one else (MUL,)
    tables = {"+": plus.tolist(), "-": negt.tolist(), "0": 0, "mul": mul.tolist()}
    if with_one:
        tables["one"] = int(enc(np.eye(k, dtype=np.int64)[None])[0])
    unit = lambda r, c: p ** (r * k + c)
    if k == 1:
        sigma = (1 % size,) if size > 1 else ()
    else:
        cycle = sum(unit(r, (r + 1) % k) for r in range(k))
        sigma = (unit(0, 0), cycle)
    return CayleyAlgebra(
        Signature(omega),
        size,
        tables,
        name=f"M{k}(Z{p})" + ("1" if with_one else ""),
        sigma_generators=sigma,
        additive_generators=tuple(unit(r, c) for r, c in positions),
    )


def upper_triangular(k: int, p: int, with_one: bool = False) -> CayleyAlgebra:
    """Upper-triangular k x k matrices over Z_p; digit d runs over positions
    (0,0),(0,1),...,(0,k-1),(1,1),... row-major on r <= c, index = sum M[r][c]*p**d."""
    positions = [(r, c) for r in range(k) for c in range(r, k)]
    size = p ** len(positions)
    if k < 1 or p < 2 or size > MAX_SIZE:
        raise ParamOutOfRangeError(f"upper_triangular: k={k}, p={p} out of range")
    mats = np.zeros((size, k, k), dtype=np.int64)
    for i in range(size):
        for d, (r, c) in enumerate(positions):
            mats[i, r, c] = (i // p ** d) % p
    plus, negt, mul, enc = _matrix_tables(mats, p, positions)
    omega = (MUL, ONE) if with_one else (MUL,)
    tables = {"+": plus.tolist(), "-": negt.tolist(), "0": 0, "mul": mul.tolist()}
    if with_one:
        tables["one"] = int(enc(np.eye(k, dtype=np.int64)[None])[0])
    unit = {pos: p ** d for d, pos in enumerate(positions)}
    sigma = tuple(unit[pos] for pos in positions)
    return CayleyAlgebra(
        Signature(omega),
        size,
        tables,
        name=f"UT{k}(Z{p})" + ("1" if with_one else ""),
        sigma_generators=sigma,
        additive_generators=sigma,
    )


def direct_product(a: CayleyAlgebra, b: CayleyAlgebra) -> CayleyAlgebra:
    """Componentwise product; index = i * b.size + j. Signatures must match."""
    if a.sig != b.sig:
        raise SignatureMismatchError(
            f"product factors have different signatures: {a.sig} vs {b.sig}"
        )
    size = a.size * b.size
    max_arity = max((s.arity for s in a.sig.symbols), default=2)
    cap = MAX_SIZE_HIGH_ARITY if max_arity >= 3 else MAX_SIZE
    if size > cap:
        raise ParamOutOfRangeError(f"product size {size} exceeds cap {cap}")
    ia = np.arange(size) // b.size
    ib = np.arange(size) % b.size
    tables = {}
    for sym in a.sig.symbols:
        ta, tb = a.np_table(sym.name), b.np_table(sym.name)
        if sym.arity == 0:
            tables[sym.name] = int(ta) * b.size + int(tb)
            continue
        grids_a = []
        grids_b = []
        for pos in range(sym.arity):
            shape = [1] * sym.arity
            shape[pos] = size
            grids_a.append(ia.reshape(shape))
            grids_b.append(ib.reshape(shape))
        tables[sym.name] = (ta[tuple(grids_a)] * b.size + tb[tuple(grids_b)]).tolist()
    gens = tuple(g * b.size for g in (a.sigma_generators or ())) + tuple(
        h for h in (b.sigma_generators or ())
    )
    addg = tuple(g * b.size for g in (a.additive_generators or ())) + tuple(
        h for h in (b.additive_generators or ())
    )
    return CayleyAlgebra(
        a.sig,
        size,
        tables,
        name=f"{a.name}x{b.name}",
        sigma_generators=gens or None,
        additive_generators=addg or None,
    )


def build_family(name: str, params: dict) -> CayleyAlgebra:
    """Construct a named family member; raises UnknownFamilyError / ParamOutOfRangeError."""
    try:
        if name == "cyclic":
            return cyclic(int(params["n"]))
        if name == "dihedral":
            return dihedral(int(params["n"]))
        if name == "symmetric":
            return symmetric(int(params["n"]))
        if name == "ring_mod_n":
            return ring_mod_n(int(params["n"]), bool(params.get("with_one", False)))
        if name == "matrix_ring":
            return matrix_ring(int(params["k"]), int(params["p"]),
                               bool(params.get("with_one", False)))
        if name == "upper_triangular":
            return upper_triangular(int(params["k"]), int(params["p"]),
                                    bool(params.get("with_one", False)))
        if name == "product":
            factors = params["factors"]
            if not isinstance(factors, list) or len(factors) < 2:
                raise ParamOutOfRangeError("product: need at least two factors")
            algs = [build_family(f["name"], f.get("params", {})) for f in factors]
            out = algs[0]
            for nxt in algs[1:]:
                out = direct_product(out, nxt)
            return out
        if name == "rmodule":
            from .rmodules import build_r_module_from_params

            return build_r_module_from_params(params)
    except KeyError as e:
        raise ParamOutOfRangeError(f"family {name!r}: missing parameter {e.args[0]!r}") from e
    raise UnknownFamilyError(f"unknown family {name!r}")
