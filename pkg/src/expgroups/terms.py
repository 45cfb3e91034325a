"""Operation symbols, signatures, terms and identities.

An expanded group is a group written additively (not necessarily abelian)
together with extra operations.  The base symbols are fixed: binary +,
unary -, nullary 0.  A signature adds a tuple of extra symbols (omega)
whose names must not collide with the base names or each other.

Terms are immutable trees over a signature with 1-based variables, and an
identity is a pair of terms asserted equal under every assignment.  This
module is dependency-free; evaluation only needs an object exposing
``op(name, *args) -> int`` over element indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class BudgetExceededError(RuntimeError):
    """A configured enumeration or query cap was exceeded."""


class DuplicateSymbolError(ValueError):
    """Two extra operation symbols share a name."""


class GammaCollisionError(ValueError):
    """An extra operation symbol reuses a base symbol name."""


class UnboundVariableError(ValueError):
    """A term variable has no value in the given assignment."""


class SignatureMismatchError(ValueError):
    """A term uses a symbol or arity the signature does not provide."""


@dataclass(frozen=True)
class OpSymbol:
    """An operation symbol with a fixed arity."""

    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be nonempty")
        if self.arity < 0:
            raise ValueError(f"symbol {self.name!r}: arity must be >= 0")


PLUS = OpSymbol("+", 2)
NEG = OpSymbol("-", 1)
ZERO = OpSymbol("0", 0)
GAMMA = (PLUS, NEG, ZERO)
GAMMA_NAMES = frozenset(s.name for s in GAMMA)


@dataclass(frozen=True)
class Signature:
    """The fixed group symbols plus a tuple of extra operation symbols."""

    omega: tuple[OpSymbol, ...] = ()

    @property
    def symbols(self) -> tuple[OpSymbol, ...]:
        return GAMMA + self.omega

    @property
    def omega_nonnullary(self) -> tuple[OpSymbol, ...]:
        return tuple(s for s in self.omega if s.arity > 0)

    def by_name(self, name: str) -> OpSymbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise SignatureMismatchError(f"unknown symbol {name!r}")

    def has(self, name: str) -> bool:
        return any(s.name == name for s in self.symbols)


def validate_signature(sig: Signature) -> None:
    """Reject omega symbols that collide with base names or repeat."""
    seen = set()
    for s in sig.omega:
        if s.name in GAMMA_NAMES:
            raise GammaCollisionError(f"omega symbol {s.name!r} collides with a base symbol")
        if s.name in seen:
            raise DuplicateSymbolError(f"duplicate omega symbol {s.name!r}")
        seen.add(s.name)


@dataclass(frozen=True)
class Var:
    """A term variable x_index, 1-based."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"variable index must be >= 1, got {self.index}")


@dataclass(frozen=True)
class App:
    """An operation symbol applied to argument terms."""

    symbol: OpSymbol
    args: tuple["Term", ...]

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise SignatureMismatchError(
                f"symbol {self.symbol.name!r} has arity {self.symbol.arity}, "
                f"got {len(self.args)} arguments"
            )


Term = Union[Var, App]


def var(i: int) -> Var:
    return Var(i)


def app(symbol: OpSymbol, *args: Term) -> App:
    return App(symbol, tuple(args))


def zero() -> App:
    return App(ZERO, ())


def neg(t: Term) -> App:
    return App(NEG, (t,))


def add(a: Term, b: Term) -> App:
    return App(PLUS, (a, b))


def sub(a: Term, b: Term) -> App:
    return add(a, neg(b))


def sum_terms(parts: Sequence[Term]) -> Term:
    """Left-associated sum of the given terms; empty sums are 0."""
    if not parts:
        return zero()
    acc = parts[0]
    for p in parts[1:]:
        acc = add(acc, p)
    return acc


def term_variables(t: Term) -> frozenset[int]:
    """Set of variable indices occurring in the term."""
    if isinstance(t, Var):
        return frozenset((t.index,))
    out: set[int] = set()
    for a in t.args:
        out |= term_variables(a)
    return frozenset(out)


def validate_term(sig: Signature, t: Term) -> None:
    """Check every symbol in the term exists in sig with matching arity."""
    if isinstance(t, Var):
        return
    declared = sig.by_name(t.symbol.name)
    if declared.arity != t.symbol.arity:
        raise SignatureMismatchError(
            f"symbol {t.symbol.name!r}: arity {t.symbol.arity} does not match "
            f"declared arity {declared.arity}"
        )
    for a in t.args:
        validate_term(sig, a)


def eval_term(alg, t: Term, assignment: Sequence[int]) -> int:
    """Evaluate a term bottom-up over element indices; x_i reads assignment[i-1]."""
    if isinstance(t, Var):
        if t.index > len(assignment):
            raise UnboundVariableError(
                f"x{t.index} unbound: assignment has {len(assignment)} values"
            )
        return assignment[t.index - 1]
    args = [eval_term(alg, a, assignment) for a in t.args]
    return alg.op(t.symbol.name, *args)


@dataclass(frozen=True)
class Identity:
    """A pair of terms asserted equal under all assignments of var_count variables."""

    lhs: Term
    rhs: Term
    var_count: int

    def __post_init__(self):
        used = term_variables(self.lhs) | term_variables(self.rhs)
        if used and max(used) > self.var_count:
            raise UnboundVariableError(
                f"identity uses x{max(used)} but declares var_count={self.var_count}"
            )

    @classmethod
    def of(cls, lhs: Term, rhs: Term) -> "Identity":
        """Build an identity with var_count = the largest variable index used."""
        used = term_variables(lhs) | term_variables(rhs)
        return cls(lhs, rhs, max(used) if used else 0)


def identity_holds(alg, ident: Identity) -> bool:
    """Exhaustively check one identity over all assignments (row-major order)."""
    return find_identity_violation(alg, ident) is None


def find_identity_violation(alg, ident: Identity) -> tuple[int, ...] | None:
    """First assignment (row-major) where lhs != rhs, or None."""
    size = alg.size
    assignment = [0] * ident.var_count
    while True:
        if eval_term(alg, ident.lhs, assignment) != eval_term(alg, ident.rhs, assignment):
            return tuple(assignment)
        for pos in range(ident.var_count - 1, -1, -1):
            assignment[pos] += 1
            if assignment[pos] < size:
                break
            assignment[pos] = 0
        else:
            return None


def iter_symbols(t: Term) -> Iterable[OpSymbol]:
    """Yield every operation symbol occurrence in the term."""
    if isinstance(t, App):
        yield t.symbol
        for a in t.args:
            yield from iter_symbols(a)
