"""JSON descriptions of algebras and identity bases, and the term text format.

Terms are prefix s-expressions: "x<k>" for variables, "zero" for the
additive identity, "(+ a b)", "(neg a)", and "(op NAME a1 .. ak)" for the
extra signature symbols.  An algebra file either names a built-in family
with parameters or inlines full operation tables; inline tables are
checked for the expanded-group and distributivity axioms at load time, so
anything this module returns is a valid instance.  All load errors are
SpecError carrying the path of the offending field.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .algebras import (
    CayleyAlgebra,
    NotAGroupError,
    NotDistributiveError,
    build_family,
    check_distributive,
    check_expanded_group,
)
from .blackbox import payload_bits_for
from .terms import (
    App,
    GAMMA,
    Identity,
    OpSymbol,
    Signature,
    Term,
    Var,
    add,
    app,
    neg,
    validate_signature,
    var,
    zero,
)
from .varieties import IdentityBasis

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SpecError(ValueError):
    """Malformed spec/basis content; message starts with the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# term text format


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse(tokens: list[str], pos: int, path: str,
           omega: dict[str, int]) -> tuple[Term, int]:
    if pos >= len(tokens):
        raise SpecError(path, "unexpected end of term")
    tok = tokens[pos]
    if tok == "(":
        if pos + 1 >= len(tokens):
            raise SpecError(path, "unexpected end after '('")
        head = tokens[pos + 1]
        pos += 2
        args: list[Term] = []
        if head == "op":
            if pos >= len(tokens) or tokens[pos] in ("(", ")"):
                raise SpecError(path, "(op ...) needs a symbol name")
            name = tokens[pos]
            if not _NAME_RE.match(name) or name in ("zero", "neg", "op"):
                raise SpecError(path, f"bad operation name {name!r}")
            pos += 1
        elif head not in ("+", "neg"):
            raise SpecError(path, f"unknown head {head!r}; expected +, neg or op")
        while pos < len(tokens) and tokens[pos] != ")":
            sub, pos = _parse(tokens, pos, path, omega)
            args.append(sub)
        if pos >= len(tokens):
            raise SpecError(path, "missing ')'")
        pos += 1
        if head == "+":
            if len(args) != 2:
                raise SpecError(path, f"+ takes 2 arguments, got {len(args)}")
            return add(args[0], args[1]), pos
        if head == "neg":
            if len(args) != 1:
                raise SpecError(path, f"neg takes 1 argument, got {len(args)}")
            return neg(args[0]), pos
        known = omega.setdefault(name, len(args))
        if known != len(args):
            raise SpecError(path, f"symbol {name!r} used with arities "
                                  f"{known} and {len(args)}")
        return app(OpSymbol(name, len(args)), *args), pos
    if tok == ")":
        raise SpecError(path, "unexpected ')'")
    if tok == "zero":
        return zero(), pos + 1
    m = _VAR_RE.match(tok)
    if m:
        return var(int(m.group(1))), pos + 1
    raise SpecError(path, f"unknown token {tok!r}")


def parse_term(text: str, path: str = "term",
               omega: dict[str, int] | None = None) -> Term:
    """Parse one term; omega, when given, accumulates and checks symbol arities."""
    if omega is None:
        omega = {}
    tokens = _tokenize(text)
    if not tokens:
        raise SpecError(path, "empty term")
    t, pos = _parse(tokens, 0, path, omega)
    if pos != len(tokens):
        raise SpecError(path, f"trailing tokens after term: {tokens[pos:]}")
    return t


def print_term(t: Term) -> str:
    """Inverse of parse_term (canonical spacing)."""
    if isinstance(t, Var):
        return f"x{t.index}"
    assert isinstance(t, App)
    name = t.symbol.name
    if name == "0":
        return "zero"
    if name == "-":
        return f"(neg {print_term(t.args[0])})"
    if name == "+":
        return f"(+ {print_term(t.args[0])} {print_term(t.args[1])})"
    inner = "".join(f" {print_term(a)}" for a in t.args)
    return f"(op {name}{inner})"


# ---------------------------------------------------------------------------
# identity basis files


def load_identity_basis(source: dict | str | Path) -> IdentityBasis:
    """Basis from a JSON file path or an already-parsed document."""
    doc, where = _load_doc(source, "basis")
    name = _expect(doc, "name", str, where)
    flag = _expect(doc, "requires_nilpotent_additive", bool, where)
    rows = _expect(doc, "identities", list, where)
    omega: dict[str, int] = {}
    if "omega" in doc:
        for i, entry in enumerate(_expect(doc, "omega", list, where)):
            epath = f"{where}.omega[{i}]"
            if not isinstance(entry, dict):
                raise SpecError(epath, "expected an object with name and arity")
            sym_name = _expect(entry, "name", str, epath)
            arity = _expect(entry, "arity", int, epath)
            if arity < 0:
                raise SpecError(f"{epath}.arity", "arity must be >= 0")
            if sym_name in omega:
                raise SpecError(f"{epath}.name", f"duplicate symbol {sym_name!r}")
            omega[sym_name] = arity
    declared = set(omega)
    identities = []
    for i, row in enumerate(rows):
        ipath = f"{where}.identities[{i}]"
        if not isinstance(row, dict):
            raise SpecError(ipath, "expected an object with lhs and rhs")
        lhs = parse_term(_expect(row, "lhs", str, ipath), f"{ipath}.lhs", omega)
        rhs = parse_term(_expect(row, "rhs", str, ipath), f"{ipath}.rhs", omega)
        identities.append(Identity.of(lhs, rhs))
    if declared and set(omega) - declared:
        extra = sorted(set(omega) - declared)
        raise SpecError(f"{where}.identities",
                        f"symbols {extra} not listed in omega")
    syms = tuple(OpSymbol(nm, ar) for nm, ar in omega.items())
    try:
        return IdentityBasis(name=name, identities=tuple(identities),
                             requires_nilpotent_additive=flag, omega=syms)
    except ValueError as e:
        raise SpecError(where, str(e)) from e


def dump_identity_basis(basis: IdentityBasis) -> dict:
    doc = {
        "name": basis.name,
        "requires_nilpotent_additive": basis.requires_nilpotent_additive,
    }
    if basis.omega:
        doc["omega"] = [{"name": s.name, "arity": s.arity} for s in basis.omega]
    doc["identities"] = [
        {"lhs": print_term(i.lhs), "rhs": print_term(i.rhs)}
        for i in basis.identities
    ]
    return doc


# ---------------------------------------------------------------------------
# algebra spec files


@dataclass(frozen=True)
class AlgebraSpec:
    """A loaded, validated algebra plus its encoding and generator choices."""

    name: str
    algebra: CayleyAlgebra
    salt_bits: int
    n: int | None
    generators: tuple[int, ...] | None
    additive_generators: tuple[int, ...] | None

    def effective_n(self, salt_bits: int | None = None,
                    n_override: int | None = None) -> int:
        """Algorithm input n: explicit override, file value, or encoding length."""
        if n_override is not None:
            n = n_override
        elif self.n is not None:
            n = self.n
        else:
            sb = self.salt_bits if salt_bits is None else salt_bits
            n = payload_bits_for(self.algebra.size) + sb
        if n < payload_bits_for(self.algebra.size):
            raise SpecError("n", f"n={n} cannot address {self.algebra.size} elements")
        return n


def _load_doc(source, default_name: str) -> tuple[dict, str]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            doc = json.loads(path.read_text())
        except OSError as e:
            raise SpecError(str(path), f"cannot read: {e}") from e
        except json.JSONDecodeError as e:
            raise SpecError(str(path), f"invalid JSON: {e}") from e
        where = path.name
    else:
        doc, where = source, default_name
    if not isinstance(doc, dict):
        raise SpecError(where, "top level must be a JSON object")
    return doc, where


def _expect(doc: dict, key: str, typ, path: str):
    if key not in doc:
        raise SpecError(f"{path}.{key}", "missing required field")
    val = doc[key]
    if typ is int and isinstance(val, bool):
        raise SpecError(f"{path}.{key}", "expected an integer, got a boolean")
    if not isinstance(val, typ):
        raise SpecError(f"{path}.{key}", f"expected {typ.__name__}, "
                                         f"got {type(val).__name__}")
    return val


def _index_list(doc: dict, key: str, size: int, path: str) -> tuple[int, ...] | None:
    if key not in doc:
        return None
    vals = _expect(doc, key, list, path)
    out = []
    for i, v in enumerate(vals):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < size:
            raise SpecError(f"{path}.{key}[{i}]",
                            f"expected an element index in [0, {size})")
        out.append(v)
    return tuple(out)


def _build_inline(doc: dict, path: str) -> CayleyAlgebra:
    size = _expect(doc, "size", int, path)
    omega = []
    for i, entry in enumerate(_expect(doc, "omega", list, path)):
        epath = f"{path}.omega[{i}]"
        if not isinstance(entry, dict):
            raise SpecError(epath, "expected an object with name and arity")
        omega.append(OpSymbol(_expect(entry, "name", str, epath),
                              _expect(entry, "arity", int, epath)))
    tables = _expect(doc, "tables", dict, path)
    try:
        sig = Signature(tuple(omega))
        validate_signature(sig)
        needed = {s.name for s in sig.symbols}
        given = set(tables)
        if needed != given:
            raise ValueError(f"tables keys {sorted(given)} do not match "
                             f"signature symbols {sorted(needed)}")
        alg = CayleyAlgebra(sig, size,
                            {name: tables[name] for name in needed},
                            name=doc.get("name", "inline"))
        check_expanded_group(alg)
        check_distributive(alg)
        return alg
    except (ValueError, NotAGroupError, NotDistributiveError) as e:
        raise SpecError(f"{path}.tables", str(e)) from e


def load_algebra_spec(source: dict | str | Path) -> AlgebraSpec:
    """Algebra spec from a JSON file path or an already-parsed document."""
    doc, where = _load_doc(source, "spec")
    if ("family" in doc) == ("inline" in doc):
        raise SpecError(where, "exactly one of 'family' or 'inline' is required")
    if "family" in doc:
        fam = _expect(doc, "family", dict, where)
        fname = _expect(fam, "name", str, f"{where}.family")
        params = fam.get("params", {})
        if not isinstance(params, dict):
            raise SpecError(f"{where}.family.params", "expected an object")
        try:
            alg = build_family(fname, params)
        except (KeyError, ValueError) as e:
            raise SpecError(f"{where}.family", str(e)) from e
    else:
        alg = _build_inline(_expect(doc, "inline", dict, where), f"{where}.inline")
    salt_bits = doc.get("salt_bits", 4)
    if not isinstance(salt_bits, int) or isinstance(salt_bits, bool) or salt_bits < 0:
        raise SpecError(f"{where}.salt_bits", "expected an integer >= 0")
    n = doc.get("n")
    if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
        raise SpecError(f"{where}.n", "expected a positive integer")
    return AlgebraSpec(
        name=doc.get("name", alg.name),
        algebra=alg,
        salt_bits=salt_bits,
        n=n,
        generators=_index_list(doc, "generators", alg.size, where),
        additive_generators=_index_list(doc, "additive_generators", alg.size, where),
    )
