"""Exact noncommutative terms over a tri-indexed complex family.

A term is a rational linear combination of monomials; a monomial is an
ordered tuple of factors; a factor is a generator symbol with a stack of
differentials applied to it.  Nothing here ever commutes: (a, b) and
(b, a) are different monomials and stay that way.

Index bookkeeping: every generator carries an Index (n, m, kappa).  The
first differential shifts (n, m) by (+1, -1), the second shifts kappa by
+1.  A product of factors lands at the componentwise sum of the factor
indices, minus declared per-factor overlap counts (r on n, t on m).

All coefficients are fractions.Fraction, so arithmetic is exact.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ArityError, CoherenceViolation, HeterogeneousSum, NameClash

FRESH_PREFIX = "_f"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*'*\Z")


class DiffKind(str, Enum):
    """The two differentials.  delta is the horizontal one (prints "d"),
    Delta the vertical one (prints "D")."""

    delta = "delta"
    Delta = "Delta"

    @property
    def token(self) -> str:
        return "d" if self is DiffKind.delta else "D"

    @property
    def other(self) -> "DiffKind":
        return DiffKind.Delta if self is DiffKind.delta else DiffKind.delta


# index shift per application, as (dn, dm, dkappa)
_SHIFTS = {DiffKind.delta: (1, -1, 0), DiffKind.Delta: (0, 0, 1)}


@dataclass(frozen=True, order=True)
class Index:
    n: int
    m: int
    kappa: int

    def __add__(self, other: "Index") -> "Index":
        return Index(self.n + other.n, self.m + other.m, self.kappa + other.kappa)

    def __sub__(self, other: "Index") -> "Index":
        return Index(self.n - other.n, self.m - other.m, self.kappa - other.kappa)

    def shifted(self, kind: DiffKind) -> "Index":
        dn, dm, dk = _SHIFTS[kind]
        return Index(self.n + dn, self.m + dm, self.kappa + dk)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n, self.m, self.kappa)

    def __str__(self) -> str:
        return f"({self.n},{self.m},{self.kappa})"


ZERO_INDEX = Index(0, 0, 0)


@dataclass(frozen=True)
class IndexBounds:
    """Optional componentwise bounds on admissible indices."""

    n_min: int | None = None
    n_max: int | None = None
    m_min: int | None = None
    m_max: int | None = None
    kappa_min: int | None = None
    kappa_max: int | None = None

    def check(self, index: Index, context: str = "") -> None:
        where = f" in {context}" if context else ""
        for value, lo, hi, name in (
            (index.n, self.n_min, self.n_max, "n"),
            (index.m, self.m_min, self.m_max, "m"),
            (index.kappa, self.kappa_min, self.kappa_max, "kappa"),
        ):
            if lo is not None and value < lo:
                raise CoherenceViolation(f"{name}={value} below bound {lo}{where}")
            if hi is not None and value > hi:
                raise CoherenceViolation(f"{name}={value} above bound {hi}{where}")


@dataclass(frozen=True)
class DiffLaws:
    """Structural laws the factor stacks obey.

    delta is always chain-cochain (two in a row kill the monomial); for
    Delta that is configurable.  commute says the two differentials may
    be reordered past each other, which also canonicalizes stacks.
    """

    Delta_chain_cochain: bool = False
    commute: bool = True

    def chain_cochain(self, kind: DiffKind) -> bool:
        if kind is DiffKind.delta:
            return True
        return self.Delta_chain_cochain


DEFAULT_LAWS = DiffLaws()


@dataclass(frozen=True)
class GeneratorSymbol:
    """A named generator of the complex, fixed to one space via its index.

    flags carries ideal membership markers (nonlocal2, local2, square2)
    and closedness declarations (dclosed, Dclosed).  role is one of
    plain, picked, completion; it is bookkeeping for layouts only.
    """

    name: str
    index: Index
    flags: frozenset[str] = frozenset()
    role: str = "plain"
    fresh: bool = False

    def closed_under(self, kind: DiffKind) -> bool:
        return ("dclosed" if kind is DiffKind.delta else "Dclosed") in self.flags

    def __str__(self) -> str:
        return self.name


def canonical_stack(stack: tuple[DiffKind, ...], laws: DiffLaws = DEFAULT_LAWS) -> tuple[DiffKind, ...]:
    # with commuting differentials a stack is determined by its kind counts;
    # sort delta entries first so equal stacks compare equal
    if laws.commute and len(stack) > 1:
        return tuple(sorted(stack, key=lambda k: 0 if k is DiffKind.delta else 1))
    return stack


def stack_vanishes(stack: Sequence[DiffKind], laws: DiffLaws = DEFAULT_LAWS) -> bool:
    for a, b in zip(stack, stack[1:]):
        if a is b and laws.chain_cochain(a):
            return True
    return False


@dataclass(frozen=True)
class Factor:
    """One generator with its applied differentials, innermost first."""

    generator: GeneratorSymbol
    diffs: tuple[DiffKind, ...] = ()

    @property
    def effective_index(self) -> Index:
        idx = self.generator.index
        for kind in self.diffs:
            idx = idx.shifted(kind)
        return idx

    @property
    def horizontal_degree(self) -> int:
        return self.effective_index.n

    def sort_key(self):
        return (self.generator.name, tuple(k.value for k in self.diffs))

    def __str__(self) -> str:
        return self.generator.name + "".join("." + k.token for k in self.diffs)


def push_diff(factor: Factor, kind: DiffKind, laws: DiffLaws = DEFAULT_LAWS) -> Factor | None:
    """Apply one differential to a factor; None means the result is zero."""
    if not factor.diffs and factor.generator.closed_under(kind):
        return None
    stack = canonical_stack(factor.diffs + (kind,), laws)
    if stack_vanishes(stack, laws):
        return None
    return Factor(factor.generator, stack)


def coherent_index(
    entries: Sequence[tuple[Index, int, int]],
    literal_m: bool = False,
    bounds: IndexBounds | None = None,
) -> Index:
    """Resulting index of a product given (index, r, t) per factor.

    n and kappa add; the overlap count r is subtracted from n and t from
    m.  literal_m switches the m component to sum n_j - t_j instead of
    m_j - t_j (an alternative reading kept behind this flag).
    """
    n = m = kappa = 0
    for idx, r, t in entries:
        if r < 0 or t < 0:
            raise CoherenceViolation(f"negative overlap ({r},{t})")
        n += idx.n - r
        m += (idx.n if literal_m else idx.m) - t
        kappa += idx.kappa
    result = Index(n, m, kappa)
    if bounds is not None:
        bounds.check(result, "product index")
    return result


@dataclass(frozen=True)
class Monomial:
    """An ordered product of factors with per-factor overlap counts."""

    factors: tuple[Factor, ...]
    overlaps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.overlaps:
            object.__setattr__(self, "overlaps", ((0, 0),) * len(self.factors))
        elif len(self.overlaps) != len(self.factors):
            raise ArityError(
                f"{len(self.overlaps)} overlap pairs for {len(self.factors)} factors"
            )

    @property
    def arity(self) -> int:
        return len(self.factors)

    def index(self, literal_m: bool = False, bounds: IndexBounds | None = None) -> Index:
        return coherent_index(
            [(f.effective_index, r, t) for f, (r, t) in zip(self.factors, self.overlaps)],
            literal_m=literal_m,
            bounds=bounds,
        )

    def signature(self) -> str:
        """Choice-vector shaped string: I where a factor is differentiated."""
        return "".join("I" if f.diffs else "0" for f in self.factors)

    def sort_key(self):
        return (len(self.factors), tuple(f.sort_key() for f in self.factors), self.overlaps)

    def __str__(self) -> str:
        parts = []
        for f, (r, t) in zip(self.factors, self.overlaps):
            piece = str(f)
            if (r, t) != (0, 0):
                piece += f"[r={r},t={t}]"
            parts.append(piece)
        return "(" + ", ".join(parts) + ")"


EMPTY_MONOMIAL = Monomial(())


class Term:
    """A finite rational combination of monomials, kept normalized."""

    __slots__ = ("_summands",)

    def __init__(self, summands: Mapping[Monomial, Fraction | int] | None = None):
        data: dict[Monomial, Fraction] = {}
        if summands:
            for mono, coeff in summands.items():
                q = Fraction(coeff)
                if q:
                    data[mono] = data.get(mono, Fraction(0)) + q
        self._summands = {m: c for m, c in data.items() if c}

    # --- constructors -------------------------------------------------
    @classmethod
    def zero(cls) -> "Term":
        return cls()

    @classmethod
    def from_monomial(cls, monomial: Monomial, coeff: Fraction | int = 1) -> "Term":
        return cls({monomial: Fraction(coeff)})

    @classmethod
    def from_factor(cls, factor: Factor, coeff: Fraction | int = 1) -> "Term":
        return cls({Monomial((factor,)): Fraction(coeff)})

    # --- inspection ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self._summands

    def items(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._summands.items(), key=lambda kv: kv[0].sort_key())

    def monomials(self) -> list[Monomial]:
        return [m for m, _ in self.items()]

    def coefficient(self, monomial: Monomial) -> Fraction:
        return self._summands.get(monomial, Fraction(0))

    def __len__(self) -> int:
        return len(self._summands)

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.items())

    def indices(self, literal_m: bool = False) -> set[Index]:
        return {m.index(literal_m=literal_m) for m in self._summands}

    @property
    def homogeneous(self) -> bool:
        return len(self.indices()) <= 1

    def index(self) -> Index | None:
        """The common index of all monomials; None for zero or mixed terms."""
        idxs = self.indices()
        if len(idxs) == 1:
            return idxs.pop()
        return None

    # --- arithmetic ---------------------------------------------------
    def __add__(self, other: "Term") -> "Term":
        merged = dict(self._summands)
        for mono, coeff in other._summands.items():
            merged[mono] = merged.get(mono, Fraction(0)) + coeff
        return Term(merged)

    def __neg__(self) -> "Term":
        return Term({m: -c for m, c in self._summands.items()})

    def __sub__(self, other: "Term") -> "Term":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Term):
            return multiply([self, other])
        return Term({m: c * Fraction(other) for m, c in self._summands.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Term) and self._summands == other._summands

    def __hash__(self) -> int:
        return hash(frozenset(self._summands.items()))

    def __str__(self) -> str:
        return render_term(self)

    def __repr__(self) -> str:
        return f"Term({render_term(self)})"


def add(left: Term, right: Term, strict: bool = True) -> Term:
    """Sum of two terms.  In strict mode both sides must be homogeneous
    of the same index; the verifier passes strict=False internally."""
    result = left + right
    if strict:
        idxs = left.indices() | right.indices()
        if len(idxs) > 1:
            raise HeterogeneousSum(
                "summands live in different spaces: " + ", ".join(sorted(map(str, idxs)))
            )
    return result


def scale(coeff: Fraction | int, term: Term) -> Term:
    return term * Fraction(coeff)


def multiply(
    terms: Sequence[Term],
    overlaps: Sequence[tuple[int, int]] | None = None,
) -> Term:
    """Ordered product of terms, fully distributed.

    overlaps, when given, declares one (r, t) pair per input term; the
    pair is attached to the first factor that input contributes, which
    keeps the total coherent sums right.
    """
    if overlaps is not None and len(overlaps) != len(terms):
        raise ArityError(f"{len(overlaps)} overlap pairs for {len(terms)} inputs")
    result: dict[Monomial, Fraction] = {EMPTY_MONOMIAL: Fraction(1)}
    for pos, term in enumerate(terms):
        extra = overlaps[pos] if overlaps is not None else (0, 0)
        step: dict[Monomial, Fraction] = {}
        for acc_mono, acc_coeff in result.items():
            for mono, coeff in term._summands.items():
                olap = mono.overlaps
                if extra != (0, 0):
                    if not mono.factors:
                        raise CoherenceViolation("overlap declared on an empty element")
                    r0, t0 = olap[0]
                    olap = ((r0 + extra[0], t0 + extra[1]),) + olap[1:]
                joined = Monomial(acc_mono.factors + mono.factors, acc_mono.overlaps + olap)
                step[joined] = step.get(joined, Fraction(0)) + acc_coeff * coeff
        result = step
        if not result:
            break
    return Term(result)


def normalize(term: Term, laws: DiffLaws = DEFAULT_LAWS) -> Term:
    """Re-canonicalize factor stacks and drop monomials the laws kill.

    Terms built through push_diff are already normal; this is the safety
    net for terms assembled directly from raw stacks.
    """
    out: dict[Monomial, Fraction] = {}
    for mono, coeff in term.items():
        factors = []
        dead = False
        for f in mono.factors:
            stack = canonical_stack(f.diffs, laws)
            if stack_vanishes(stack, laws):
                dead = True
                break
            factors.append(Factor(f.generator, stack))
        if dead:
            continue
        new = Monomial(tuple(factors), mono.overlaps)
        out[new] = out.get(new, Fraction(0)) + coeff
    return Term(out)


# --- rendering --------------------------------------------------------

def _coeff_prefix(coeff: Fraction) -> str:
    if coeff == 1:
        return ""
    if coeff == -1:
        return "-"
    return f"{coeff}*"


def render_term(term: Term) -> str:
    items = term.items()
    if not items:
        return "0"
    pieces = []
    for mono, coeff in items:
        pieces.append(_coeff_prefix(coeff) + str(mono))
    out = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out


def render_equation(lhs: Term, rhs: Term) -> str:
    if lhs.is_zero:
        left = "0"
    else:
        items = lhs.items()
        if len(items) == 1 and items[0][1] == 1 and items[0][0].arity == 1:
            left = str(items[0][0].factors[0])
        else:
            left = render_term(lhs)
    return f"{left} = {render_term(rhs)}"


# --- registry ---------------------------------------------------------

class SymbolRegistry:
    """Session-scoped name table.  Names are unique; fresh names come
    from a counter and use a prefix users cannot declare."""

    def __init__(self):
        self._symbols: dict[str, GeneratorSymbol] = {}
        self._fresh_count = 0
        self._lock = threading.Lock()

    def declare(
        self,
        name: str,
        index: Index,
        flags: Iterable[str] = (),
        role: str = "plain",
    ) -> GeneratorSymbol:
        if not _NAME_RE.match(name):
            raise NameClash(f"invalid generator name {name!r}")
        if name.startswith(FRESH_PREFIX):
            raise NameClash(f"{name!r} uses the reserved fresh prefix {FRESH_PREFIX!r}")
        with self._lock:
            if name in self._symbols:
                raise NameClash(f"generator {name!r} already declared")
            sym = GeneratorSymbol(name, index, frozenset(flags), role)
            self._symbols[name] = sym
        return sym

    def fresh(self, index: Index, role: str = "plain", flags: Iterable[str] = ()) -> GeneratorSymbol:
        with self._lock:
            self._fresh_count += 1
            name = f"{FRESH_PREFIX}{self._fresh_count}"
            sym = GeneratorSymbol(name, index, frozenset(flags), role, fresh=True)
            self._symbols[name] = sym
        return sym

    def get(self, name: str) -> GeneratorSymbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise NameClash(f"unknown generator {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def names(self) -> list[str]:
        return sorted(self._symbols)


def make_generator(
    registry: SymbolRegistry,
    name: str,
    index: Index,
    flags: Iterable[str] = (),
    role: str = "plain",
) -> Term:
    """Declare a generator and hand back the corresponding one-factor term."""
    sym = registry.declare(name, index, flags, role)
    return Term.from_factor(Factor(sym))
