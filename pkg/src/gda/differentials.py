"""Product-rule application of the two differentials.

The horizontal differential lowers m while raising n; the vertical one
raises kappa.  Both act on products summand by summand.  Two sign
conventions are supported: the plain one puts +1 on every summand (so a
repeated horizontal differential of a 2-factor product yields a doubled
cross term instead of zero), the koszul one weights each summand by the
parity of the horizontal degrees to its left, restoring d^2 = 0 on
products.
"""
from __future__ import annotations

from enum import Enum
from fractions import Fraction

from .errors import SlotError
from .terms import (
    DEFAULT_LAWS,
    DiffKind,
    DiffLaws,
    Factor,
    Index,
    IndexBounds,
    Monomial,
    Term,
    canonical_stack,
    stack_vanishes,
)


class SignMode(str, Enum):
    paper_literal = "paper"
    koszul = "koszul"


class EpsilonMode(str, Enum):
    """How the auxiliary pairing realizes its two arguments: as both
    factors of the monomial, or as the first factor alone."""

    pair = "pair"
    drop = "drop"


def index_shift(kind: DiffKind, index: Index, bounds: IndexBounds | None = None) -> Index:
    shifted = index.shifted(kind)
    if bounds is not None:
        bounds.check(shifted, f"{kind.token}-shift of {index}")
    return shifted


def horizontal_degree(factor: Factor) -> int:
    return factor.effective_index.n


def classify_push(
    factor: Factor, kind: DiffKind, laws: DiffLaws = DEFAULT_LAWS
) -> tuple[Factor | None, str | None]:
    """Push one differential onto a factor, reporting why it died.

    Reasons: "closed" (generator declared closed under this kind),
    "square" (double application visible in the raw stack), or
    "commute-square" (visible only after commuting the stack).  A
    surviving factor comes back with reason None.
    """
    if not factor.diffs and factor.generator.closed_under(kind):
        return None, "closed"
    raw = factor.diffs + (kind,)
    if stack_vanishes(raw, laws):
        return None, "square"
    canon = canonical_stack(raw, laws)
    if stack_vanishes(canon, laws):
        return None, "commute-square"
    return Factor(factor.generator, canon), None


def position_sign(mode: SignMode, monomial: Monomial, position: int) -> int:
    """Sign carried by the product-rule summand at a 1-based
    position: +1 always in plain mode, Koszul parity of the preceding
    horizontal degrees otherwise."""
    if mode is SignMode.koszul:
        degree = sum(f.effective_index.n for f in monomial.factors[: position - 1])
        if degree % 2:
            return -1
    return 1


def apply_differential(
    kind: DiffKind,
    term: Term,
    sign: SignMode = SignMode.paper_literal,
    laws: DiffLaws = DEFAULT_LAWS,
) -> Term:
    """Differential of a term, one product-rule summand per factor."""
    out = Term.zero()
    for monomial, coeff in term:
        out = out + _product_rule(kind, monomial, coeff, range(1, monomial.arity + 1), sign, laws)
    return out


def apply_slot_differential(
    kind: DiffKind,
    monomial: Monomial,
    slots: set[int] | frozenset[int],
    sign: SignMode = SignMode.paper_literal,
    laws: DiffLaws = DEFAULT_LAWS,
) -> Term:
    """Product-rule sum restricted to the given 1-based factor positions."""
    for slot in slots:
        if not 1 <= slot <= monomial.arity:
            raise SlotError(f"slot {slot} out of range for arity {monomial.arity}")
    return _product_rule(kind, monomial, Fraction(1), sorted(slots), sign, laws)


def _product_rule(kind, monomial, coeff, positions, sign, laws) -> Term:
    summands: dict[Monomial, Fraction] = {}
    for pos in positions:
        pushed, _ = classify_push(monomial.factors[pos - 1], kind, laws)
        if pushed is None:
            continue
        factors = list(monomial.factors)
        factors[pos - 1] = pushed
        new = Monomial(tuple(factors), monomial.overlaps)
        value = coeff * position_sign(sign, monomial, pos)
        summands[new] = summands.get(new, Fraction(0)) + value
    return Term(summands)


def epsilon(mode: EpsilonMode, a: Factor, x: Factor | None) -> list[Factor] | None:
    """Auxiliary pairing: in pair mode both arguments become factors
    (None for the zero element absorbs the whole monomial); in drop mode
    only the first survives."""
    if mode is EpsilonMode.drop:
        return [a]
    if x is None:
        return None
    return [a, x]
