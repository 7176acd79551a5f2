"""Completions, closure hypothesis sets, and the invariant-class checks.

The class expression interleaves four auxiliary completion factors with
three content slots built from one picked element: the twice
differentiated element (vertical over horizontal), the horizontally
differentiated element, and the element itself.  Closedness is checked
by expanding the differential of the class and cancelling what survives
against a registered closure hypothesis; independence of the picked
element is checked by reconstructing an explicit primitive for the
difference of two classes.

All cancellation is exact: a hypothesis fires only when every one of its
monomials is present with one common coefficient ratio.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product

from .differentials import (
    EpsilonMode,
    SignMode,
    apply_differential,
    apply_slot_differential,
    classify_push,
    position_sign,
)
from .errors import HypothesisError, LayoutError
from .ideals import IdealKind, IdealRegistry
from .terms import (
    DEFAULT_LAWS,
    DiffKind,
    DiffLaws,
    Factor,
    Monomial,
    Term,
    add,
    multiply,
    render_term,
)


class XiMode(str, Enum):
    sum_enriched = "sum"
    ordered_pairs = "pairs"


@dataclass(frozen=True)
class VerifierSetup:
    d: DiffKind = DiffKind.delta
    sign: SignMode = SignMode.paper_literal
    epsilon_mode: EpsilonMode = EpsilonMode.pair
    xi_mode: XiMode = XiMode.sum_enriched
    laws: DiffLaws = DEFAULT_LAWS

    @property
    def dbar(self) -> DiffKind:
        return self.d.other


@dataclass
class TraceStep:
    rule: str
    before: str
    after: str


@dataclass
class VerificationReport:
    claim: str
    status: str
    residual: Term
    trace: list[TraceStep]
    primitive: Term | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "schema": "gda.report/1",
            "claim": self.claim,
            "status": self.status,
            "residual": render_term(self.residual),
            "trace": [
                {"rule": s.rule, "before": s.before, "after": s.after}
                for s in self.trace
            ],
            "primitive": None if self.primitive is None else render_term(self.primitive),
            "notes": list(self.notes),
        }


# --- completions ------------------------------------------------------

@dataclass(frozen=True)
class Completion:
    """Alternating layout of auxiliary factors around picked elements."""

    picked: tuple[Factor, ...]
    completions: tuple[Factor, ...]

    def layout(self) -> Monomial:
        factors: list[Factor] = []
        for i, comp in enumerate(self.completions):
            factors.append(comp)
            if i < len(self.picked):
                factors.append(self.picked[i])
        return Monomial(tuple(factors))

    def completion_slots(self) -> tuple[int, ...]:
        # completion j sits before picked j: positions 1, 3, 5, ...
        return tuple(range(1, 2 * len(self.completions), 2))


def make_completion(phis: list[Factor], Phis: list[Factor]) -> Completion:
    if len(Phis) != len(phis) + 1:
        raise LayoutError(
            f"{len(phis)} picked elements need {len(phis) + 1} completion"
            f" factors, got {len(Phis)}"
        )
    return Completion(tuple(phis), tuple(Phis))


def slot_diff_sum(
    term: Term, slots: tuple[int, ...], setup: VerifierSetup
) -> Term:
    """Sum over the designated slots of the differential applied to that
    slot only, extended linearly."""
    out = Term.zero()
    for mono, coeff in term:
        out = out + coeff * apply_slot_differential(
            setup.d, mono, set(slots), setup.sign, setup.laws
        )
    return out


def check_closed(
    c: Completion,
    setup: VerifierSetup,
    ideals: IdealRegistry | None = None,
) -> VerificationReport:
    """Expand the completion-slot differential sum and reduce; residual
    zero means the completion is closed outright."""
    term = Term.from_monomial(c.layout())
    expanded = slot_diff_sum(term, c.completion_slots(), setup)
    trace: list[TraceStep] = []
    if ideals is not None:
        expanded, deleted = ideals.reduce_with_trace(expanded, setup.laws)
        trace = [TraceStep(reason, str(m), "0") for reason, m in deleted]
    status = "ok" if expanded.is_zero else "fail"
    return VerificationReport("closed", status, expanded, trace)


# --- class layout -----------------------------------------------------

def _content_arity(term: Term) -> int:
    arities = {m.arity for m in term.monomials()}
    if len(arities) > 1:
        raise LayoutError("content slot with mixed arities")
    return arities.pop() if arities else 1


def class_layout(
    setup: VerifierSetup,
    completions: tuple[Factor, ...],
    c1: Term | None,
    c2: Term,
    c3: Term,
) -> tuple[Term, tuple[int, ...]]:
    """Interleave the four completion factors with the content slots.

    Mirrors the auxiliary pairing at term level: in pair mode the first
    completion is followed by the first content (a zero content absorbs
    the product); in drop mode the first content is omitted and the two
    leading completions sit side by side.  Returns the layout and the
    1-based completion positions.
    """
    if len(completions) != 4:
        raise LayoutError(f"class layout needs 4 completion factors, got {len(completions)}")
    P = [Term.from_factor(f) for f in completions]
    if setup.epsilon_mode is EpsilonMode.pair:
        parts = [(True, P[0]), (False, c1 if c1 is not None else Term.zero()),
                 (True, P[1]), (False, c2), (True, P[2]), (False, c3), (True, P[3])]
    else:
        parts = [(True, P[0]), (True, P[1]), (False, c2),
                 (True, P[2]), (False, c3), (True, P[3])]
    slots: list[int] = []
    pos = 1
    for is_completion, t in parts:
        if is_completion:
            slots.append(pos)
            pos += 1
        else:
            pos += _content_arity(t)
    return multiply([t for _, t in parts]), tuple(slots)


def _content_terms(
    setup: VerifierSetup, xi1: Term, xi2: Term, xi3: Term, slot1_level: int
) -> tuple[Term, Term, Term]:
    base = xi1
    if slot1_level:
        base = apply_differential(setup.d, base, setup.sign, setup.laws)
    c1 = apply_differential(setup.dbar, base, setup.sign, setup.laws)
    c2 = apply_differential(setup.d, xi2, setup.sign, setup.laws)
    return c1, c2, xi3


def build_class(
    phi: Factor | Term,
    completions: tuple[Factor, ...],
    setup: VerifierSetup,
) -> Term:
    """The candidate invariant for one picked element (or a sum of
    picked elements, expanded multilinearly)."""
    phi_t = Term.from_factor(phi) if isinstance(phi, Factor) else phi
    c1, c2, c3 = _content_terms(setup, phi_t, phi_t, phi_t, slot1_level=1)
    layout, _ = class_layout(setup, completions, c1, c2, c3)
    return layout


# --- closure hypothesis sets ------------------------------------------

@dataclass(frozen=True)
class ClosureHypothesis:
    tag: str
    assignment: tuple[str, str, str]
    slot1_level: int
    term: Term


@dataclass
class ClosureSet:
    phi: Factor
    psi: Factor
    completions: tuple[Factor, ...]
    xi_mode: XiMode
    setup: VerifierSetup
    conditions: list[ClosureHypothesis] = field(default_factory=list)

    def find(self, assignment: tuple[str, str, str], slot1_level: int) -> ClosureHypothesis | None:
        for h in self.conditions:
            if h.assignment == assignment and h.slot1_level == slot1_level:
                return h
        return None

    def without(self, tag: str) -> "ClosureSet":
        kept = [h for h in self.conditions if h.tag != tag]
        return ClosureSet(self.phi, self.psi, self.completions, self.xi_mode, self.setup, kept)


def build_closure_set(
    phi: Factor,
    psi: Factor,
    completions: tuple[Factor, ...],
    ideals: IdealRegistry,
    setup: VerifierSetup,
) -> ClosureSet:
    """Enumerate the closure conditions over the slot assignments and
    register each as a vanishing combination for the matcher.

    Every assignment is registered at both first-slot depths: the singly
    differentiated content cancels primitive re-expansions, the doubly
    differentiated one cancels the class differential itself.
    """
    for f in (phi, psi):
        member = Factor(f.generator, f.diffs + (setup.d,))
        if not ideals.is_member(IdealKind.nonlocal2, member):
            raise HypothesisError(
                f"{setup.d.token}({f}) must be registered in the non-local"
                " order-2 ideal before closure conditions can be formed"
            )
    phi_t = Term.from_factor(phi)
    psi_t = Term.from_factor(psi)
    if setup.xi_mode is XiMode.sum_enriched:
        options = [
            (phi.generator.name, phi_t),
            (psi.generator.name, psi_t),
            (f"{phi.generator.name}+{psi.generator.name}", add(phi_t, psi_t)),
        ]
    else:
        options = [
            (f"{phi.generator.name}*{phi.generator.name}", multiply([phi_t, phi_t])),
            (f"{phi.generator.name}*{psi.generator.name}", multiply([phi_t, psi_t])),
            (f"{psi.generator.name}*{psi.generator.name}", multiply([psi_t, psi_t])),
        ]
    closure_set = ClosureSet(phi, psi, completions, setup.xi_mode, setup)
    for (n1, t1), (n2, t2), (n3, t3) in product(options, repeat=3):
        for level in (0, 1):
            c1, c2, c3 = _content_terms(setup, t1, t2, t3, level)
            layout, slots = class_layout(setup, completions, c1, c2, c3)
            condition = slot_diff_sum(layout, slots, setup)
            tag = f"{n1}|{n2}|{n3}|{'Dd' if level else 'D'}"
            closure_set.conditions.append(
                ClosureHypothesis(tag, (n1, n2, n3), level, condition)
            )
    return closure_set


# --- cancellation machinery -------------------------------------------

def _match_ratio(term: Term, hypothesis: Term) -> Fraction | None:
    items = hypothesis.items()
    if not items:
        return None
    first_mono, first_coeff = items[0]
    ratio = term.coefficient(first_mono) / first_coeff
    if ratio == 0:
        return None
    for mono, coeff in items[1:]:
        if term.coefficient(mono) != ratio * coeff:
            return None
    return ratio


def cancel_hypotheses(
    term: Term, hypotheses: list[ClosureHypothesis]
) -> tuple[Term, list[TraceStep]]:
    steps: list[TraceStep] = []
    changed = True
    while changed and not term.is_zero:
        changed = False
        for h in hypotheses:
            ratio = _match_ratio(term, h.term)
            if ratio is not None:
                before = render_term(term)
                term = term - h.term * ratio
                steps.append(TraceStep(f"hypothesis:{h.tag}", before, render_term(term)))
                changed = True
    return term, steps


def reduce_modulo(
    term: Term,
    ideals: IdealRegistry,
    hypotheses: list[ClosureHypothesis],
    setup: VerifierSetup,
) -> tuple[Term, list[TraceStep]]:
    """Ideal reduction followed by exhaustive hypothesis cancellation."""
    reduced, deleted = ideals.reduce_with_trace(term, setup.laws)
    trace = [TraceStep(reason, str(m), "0") for reason, m in deleted]
    remaining, steps = cancel_hypotheses(reduced, hypotheses)
    return remaining, trace + steps


def _expand_with_trace(
    term: Term, setup: VerifierSetup
) -> tuple[Term, list[TraceStep]]:
    """Product-rule expansion of the chosen differential, recording each
    law-killed slot."""
    survivors = Term.zero()
    trace: list[TraceStep] = []
    for mono, coeff in term:
        for pos in range(1, mono.arity + 1):
            factor = mono.factors[pos - 1]
            pushed, reason = classify_push(factor, setup.d, setup.laws)
            if pushed is None:
                trace.append(
                    TraceStep(
                        f"law:{reason}",
                        f"slot {pos}: {setup.d.token}({factor})",
                        "0",
                    )
                )
                continue
            factors = list(mono.factors)
            factors[pos - 1] = pushed
            piece = Monomial(tuple(factors), mono.overlaps)
            sgn = position_sign(setup.sign, mono, pos)
            survivors = survivors + Term({piece: coeff * sgn})
    return survivors, trace


# --- the two verifications --------------------------------------------

def verify_cocycle(
    class_term: Term,
    closure_set: ClosureSet,
    ideals: IdealRegistry,
    setup: VerifierSetup,
) -> VerificationReport:
    survivors, trace = _expand_with_trace(class_term, setup)
    residual, steps = reduce_modulo(survivors, ideals, closure_set.conditions, setup)
    trace += steps
    status = "ok" if residual.is_zero else "fail"
    notes = []
    if status == "fail":
        notes.append("surviving terms: " + render_term(residual))
        near = _nearest_hypothesis(residual, closure_set)
        if near:
            notes.append(f"nearest hypothesis: {near}")
    return VerificationReport("cocycle", status, residual, trace, notes=notes)


def _nearest_hypothesis(residual: Term, closure_set: ClosureSet) -> str | None:
    best_tag = None
    best_overlap = 0
    monos = set(residual.monomials())
    for h in closure_set.conditions:
        overlap = sum(1 for m in h.term.monomials() if m in monos)
        if overlap > best_overlap:
            best_overlap = overlap
            best_tag = h.tag
    return best_tag


def verify_independence(
    phi: Factor,
    eta: Factor,
    completions: tuple[Factor, ...],
    closure_set: ClosureSet,
    ideals: IdealRegistry,
    setup: VerifierSetup,
) -> VerificationReport:
    """Check that replacing the picked element by its sum with another
    admissible element shifts the class by an exact differential, and
    produce that primitive."""
    phi_t = Term.from_factor(phi)
    eta_t = Term.from_factor(eta)
    class_phi = build_class(phi_t, completions, setup)
    class_sum = build_class(add(phi_t, eta_t), completions, setup)
    diff = class_sum - class_phi

    _, slots = class_layout(
        setup,
        completions,
        *_content_terms(setup, phi_t, phi_t, phi_t, 1),
    )
    content_positions = [
        p for p in range(1, 8 if setup.epsilon_mode is EpsilonMode.pair else 7)
        if p not in slots
    ]

    trace: list[TraceStep] = []
    primitive = Term.zero()
    failures: list[str] = []
    for mono, coeff in diff:
        names = tuple(
            mono.factors[p - 1].generator.name for p in content_positions
        )
        hypothesis = closure_set.find(names, 0)
        if hypothesis is None:
            failures.append(f"no closure condition for assignment {names}")
            continue
        slot1_pos = content_positions[0] if setup.epsilon_mode is EpsilonMode.pair else None
        if slot1_pos is None:
            failures.append("primitive reconstruction needs the paired layout")
            break
        stripped = _strip_inner(mono.factors[slot1_pos - 1], setup)
        if stripped is None:
            failures.append(f"cannot strip the first content slot of {mono}")
            continue
        factors = list(mono.factors)
        factors[slot1_pos - 1] = stripped
        candidate = Monomial(tuple(factors), mono.overlaps)
        expanded, law_steps = _expand_with_trace(Term.from_monomial(candidate), setup)
        reduced, del_steps = ideals.reduce_with_trace(expanded, setup.laws)
        for reason, m in del_steps:
            trace.append(TraceStep(reason, str(m), "0"))
        trace += law_steps
        remaining, cancel_steps = cancel_hypotheses(reduced, [hypothesis])
        trace += cancel_steps
        scale = _single_monomial_ratio(remaining, mono)
        if scale is None:
            failures.append(
                f"re-expansion of the candidate for {mono} left {render_term(remaining)}"
            )
            continue
        contribution = Term({candidate: coeff / scale})
        primitive = primitive + contribution
        trace.append(TraceStep("primitive", str(mono), render_term(contribution)))

    recomputed, _ = _expand_with_trace(primitive, setup)
    recomputed, final_steps = reduce_modulo(recomputed, ideals, closure_set.conditions, setup)
    trace += final_steps
    residual = diff - recomputed
    status = "ok" if residual.is_zero and not failures else "fail"
    return VerificationReport(
        "independence", status, residual, trace,
        primitive=primitive, notes=failures,
    )


def _strip_inner(factor: Factor, setup: VerifierSetup) -> Factor | None:
    if setup.d in factor.diffs:
        diffs = list(factor.diffs)
        diffs.remove(setup.d)
        return Factor(factor.generator, tuple(diffs))
    return None


def _single_monomial_ratio(term: Term, mono: Monomial) -> Fraction | None:
    items = term.items()
    if len(items) != 1 or items[0][0] != mono:
        return None
    return items[0][1]
