"""Vanishing ideals and the factorization move catalogue."""
import pytest

from gda import (
    DEFAULT_LAWS,
    DiffKind,
    Factor,
    IdealKind,
    IdealRegistry,
    Index,
    Monomial,
    SymbolRegistry,
    Term,
    add,
    factorization_moves,
    render_term,
)

D = DiffKind.delta


@pytest.fixture
def reg():
    r = SymbolRegistry()
    r.declare("a", Index(1, 0, 0))
    r.declare("b", Index(0, 1, 0))
    r.declare("c", Index(0, 0, 1))
    return r


def fac(reg, name, *diffs):
    return Factor(reg.get(name), tuple(diffs))


def test_nonlocal2_kills_any_repeat(reg):
    ir = IdealRegistry()
    ir.register(IdealKind.nonlocal2, fac(reg, "a", D), DEFAULT_LAWS)
    gap = Monomial((fac(reg, "a", D), fac(reg, "b"), fac(reg, "a", D)))
    assert ir.monomial_vanishes(gap) == "ideal:nonlocal2"
    single = Monomial((fac(reg, "a", D), fac(reg, "b")))
    assert ir.monomial_vanishes(single) is None


def test_local2_needs_adjacency(reg):
    ir = IdealRegistry()
    ir.register(IdealKind.local2, fac(reg, "a", D), DEFAULT_LAWS)
    adj = Monomial((fac(reg, "a", D), fac(reg, "a", D)))
    gap = Monomial((fac(reg, "a", D), fac(reg, "b"), fac(reg, "a", D)))
    assert ir.monomial_vanishes(adj) == "ideal:local2"
    assert ir.monomial_vanishes(gap) is None


def test_square2_is_per_member(reg):
    # square2 kills adjacent copies of one registered factor, not mixed pairs.
    ir = IdealRegistry()
    ir.register(IdealKind.square2, fac(reg, "a", D), DEFAULT_LAWS)
    ir.register(IdealKind.square2, fac(reg, "b"), DEFAULT_LAWS)
    assert ir.monomial_vanishes(Monomial((fac(reg, "a", D), fac(reg, "a", D))))
    assert ir.monomial_vanishes(Monomial((fac(reg, "a", D), fac(reg, "b")))) is None


def test_membership_and_listing(reg):
    ir = IdealRegistry()
    ir.register(IdealKind.nonlocal2, fac(reg, "a", D), DEFAULT_LAWS)
    assert ir.is_member(IdealKind.nonlocal2, fac(reg, "a", D))
    assert not ir.is_member(IdealKind.nonlocal2, fac(reg, "b"))
    assert fac(reg, "a", D) in ir.members(IdealKind.nonlocal2)


def test_reduce_with_trace_reports_each_deletion(reg):
    ir = IdealRegistry()
    ir.register(IdealKind.nonlocal2, fac(reg, "a", D), DEFAULT_LAWS)
    dead = Monomial((fac(reg, "a", D), fac(reg, "b"), fac(reg, "a", D)))
    alive = Monomial((fac(reg, "b"), fac(reg, "b"), fac(reg, "c")))
    term = add(Term.from_monomial(dead), Term.from_monomial(alive), strict=False)
    reduced, trace = ir.reduce_with_trace(term)
    assert reduced == Term.from_monomial(alive)
    assert [reason for reason, _ in trace] == ["ideal:nonlocal2"]
    assert trace[0][1] == dead


def test_reduce_applies_square_law(reg):
    # an adjacent chain-cochain repeat dies by law even with no ideal registered
    ir = IdealRegistry()
    m = Monomial((fac(reg, "a", D, D), fac(reg, "b")))
    reduced, trace = ir.reduce_with_trace(Term.from_monomial(m))
    assert reduced.is_zero
    assert trace[0][0] == "law:square"


def test_moves_at_the_edges(reg):
    m = Monomial((fac(reg, "a", D), fac(reg, "b")))
    moves = factorization_moves(m, reg)
    assert [(mv.position, mv.variant) for mv in moves] == [(1, "right"), (2, "left")]
    first, second = moves
    # fresh index balances the resolved factor against its neighbour
    assert first.fresh.index == Index(2, -2, 0)
    assert second.fresh.index == Index(-2, 2, 0)
    assert render_term(Term.from_monomial(first.replacement)) == "(_f1, b)"
    assert render_term(Term.from_monomial(second.replacement)) == "(a.d, _f2)"


def test_interior_position_offers_three_variants(reg):
    m = Monomial((fac(reg, "a", D), fac(reg, "b"), fac(reg, "c")))
    moves = factorization_moves(m, reg, positions=[2])
    assert [mv.variant for mv in moves] == ["left", "right", "two-sided"]
    for mv in moves:
        assert mv.position == 2
        assert mv.resolved == fac(reg, "b")


def test_two_sided_fresh_subtracts_both_neighbours(reg):
    m = Monomial((fac(reg, "a"), fac(reg, "b"), fac(reg, "c")))
    two_sided = [
        mv for mv in factorization_moves(m, reg, positions=[2])
        if mv.variant == "two-sided"
    ][0]
    expect = Index(0, 1, 0) - Index(1, 0, 0) - Index(0, 0, 1)
    assert two_sided.fresh.index == expect
