"""Square-vanishing ideals of order 2 and the factorization moves.

Membership is declared per factor pattern (generator plus exact diff
stack).  Reduction deletes monomials: two non-local members anywhere,
two local members side by side, the same square member twice side by
side, or any factor whose stack the structural laws annihilate.

The factorization moves run the vanishing rules backwards: given a
single-monomial orthogonality condition, each factor can be expressed
through its neighbours and one fresh generator whose index is solved
from the coherence equations.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ArityError
from .terms import (
    DEFAULT_LAWS,
    DiffLaws,
    Factor,
    GeneratorSymbol,
    Index,
    Monomial,
    SymbolRegistry,
    Term,
    canonical_stack,
    stack_vanishes,
)


class IdealKind(str, Enum):
    nonlocal2 = "nonlocal2"
    local2 = "local2"
    square2 = "square2"


class IdealRegistry:
    """Session-scoped, append-only store of ideal members."""

    def __init__(self):
        # insertion-ordered so listings and reports are deterministic
        self._members: dict[IdealKind, dict[Factor, None]] = {k: {} for k in IdealKind}

    def register(self, kind: IdealKind, pattern: Factor, laws: DiffLaws = DEFAULT_LAWS) -> None:
        canon = Factor(pattern.generator, canonical_stack(pattern.diffs, laws))
        self._members[IdealKind(kind)][canon] = None

    def members(self, kind: IdealKind) -> list[Factor]:
        return list(self._members[IdealKind(kind)])

    def is_member(self, kind: IdealKind, factor: Factor) -> bool:
        return factor in self._members[IdealKind(kind)]

    def monomial_vanishes(self, monomial: Monomial, laws: DiffLaws = DEFAULT_LAWS) -> str | None:
        """Reason the monomial is deleted, or None if it survives."""
        for f in monomial.factors:
            if stack_vanishes(canonical_stack(f.diffs, laws), laws):
                return "law:square"
        nonlocal_count = sum(
            1 for f in monomial.factors if self.is_member(IdealKind.nonlocal2, f)
        )
        if nonlocal_count >= 2:
            return "ideal:nonlocal2"
        for a, b in zip(monomial.factors, monomial.factors[1:]):
            if self.is_member(IdealKind.local2, a) and self.is_member(IdealKind.local2, b):
                return "ideal:local2"
            if a == b and self.is_member(IdealKind.square2, a):
                return "ideal:square2"
        return None

    def reduce(self, term: Term, laws: DiffLaws = DEFAULT_LAWS) -> Term:
        reduced, _ = self.reduce_with_trace(term, laws)
        return reduced

    def reduce_with_trace(
        self, term: Term, laws: DiffLaws = DEFAULT_LAWS
    ) -> tuple[Term, list[tuple[str, Monomial]]]:
        """Reduce and report each deletion as (reason, monomial)."""
        kept: dict[Monomial, Fraction] = {}
        deleted: list[tuple[str, Monomial]] = []
        for monomial, coeff in term:
            reason = self.monomial_vanishes(monomial, laws)
            if reason is None:
                kept[monomial] = coeff
            else:
                deleted.append((reason, monomial))
        return Term(kept), deleted


@dataclass(frozen=True)
class FactorizationResult:
    """One resolution variant for one position of a vanishing product."""

    position: int  # 1-based
    variant: str  # left | right | two-sided
    resolved: Factor
    replacement: Monomial
    fresh: GeneratorSymbol


def factorization_moves(
    monomial: Monomial,
    registry: SymbolRegistry,
    positions: list[int] | None = None,
) -> list[FactorizationResult]:
    """All resolution variants for a single vanishing monomial.

    The end factors have one variant each (through the inner neighbour);
    interior factors have left, right, and two-sided variants.  Each
    variant allocates one fresh generator; its index is the resolved
    factor's index minus the neighbours', so the replacement is coherent
    by construction.
    """
    factors = monomial.factors
    if len(factors) < 2:
        raise ArityError("factorization needs at least two factors")
    out: list[FactorizationResult] = []
    wanted = positions if positions is not None else range(1, len(factors) + 1)
    for pos in wanted:
        resolved = factors[pos - 1]
        left = factors[pos - 2] if pos >= 2 else None
        right = factors[pos] if pos <= len(factors) - 1 else None
        variants: list[tuple[str, list[Factor | None]]] = []
        if pos == 1:
            variants.append(("right", [None, right]))
        elif pos == len(factors):
            variants.append(("left", [left, None]))
        else:
            variants.append(("left", [left, None]))
            variants.append(("right", [None, right]))
            variants.append(("two-sided", [left, None, right]))
        for name, shape in variants:
            neighbour_sum = Index(0, 0, 0)
            for f in shape:
                if f is not None:
                    neighbour_sum = neighbour_sum + f.effective_index
            fresh_index = resolved.effective_index - neighbour_sum
            fresh = registry.fresh(fresh_index)
            replacement = tuple(
                Factor(fresh) if f is None else f for f in shape
            )
            out.append(
                FactorizationResult(
                    position=pos,
                    variant=name,
                    resolved=resolved,
                    replacement=Monomial(replacement),
                    fresh=fresh,
                )
            )
    return out
