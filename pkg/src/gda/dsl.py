"""Session files: tokenizer, parser, canonical printer, builder.

A session file is a list of statements, each ended by a semicolon, with
``#`` comments.  Statements keep their surface syntax so a parsed file
prints back canonically; resolution against the session configuration
(which differential the ``d(...)`` wrapper means, which closed flag a
generator gets) happens when the session is built.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from .conditions import Condition, check_coherence
from .differentials import EpsilonMode, SignMode
from .errors import GdaError, GdaSyntaxError, HypothesisError, NameClash
from .ideals import IdealKind, IdealRegistry
from .terms import (
    ZERO_INDEX,
    DiffKind,
    Factor,
    Index,
    IndexBounds,
    Monomial,
    SymbolRegistry,
    Term,
    normalize,
)
from .verifier import (
    Completion,
    ClosureSet,
    VerifierSetup,
    XiMode,
    build_class,
    build_closure_set,
    make_completion,
)

_IDEAL_KINDS = ("nonlocal2", "local2", "square2")
_BOUND_KEYS = {
    "n-min": "n_min", "n-max": "n_max",
    "m-min": "m_min", "m-max": "m_max",
    "kappa-min": "kappa_min", "kappa-max": "kappa_max",
}


# --- statements -------------------------------------------------------

@dataclass(frozen=True)
class FactorExpr:
    """Surface form of one factor: a generator name, differential
    wrappers innermost first, and an optional overlap suffix."""

    name: str
    wraps: tuple[str, ...] = ()
    r: int = 0
    t: int = 0

    def render(self) -> str:
        out = self.name
        for w in self.wraps:
            out = f"{w}({out})"
        if self.r or self.t:
            out += f"[r={self.r},t={self.t}]"
        return out


@dataclass(frozen=True)
class SetStatement:
    key: str
    value: str
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return f"set {self.key} {self.value};"


@dataclass(frozen=True)
class GenStatement:
    name: str
    index: Index
    flags: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        out = f"gen {self.name} index {self.index}"
        if self.flags:
            out += f" flags [{', '.join(self.flags)}]"
        return out + ";"


@dataclass(frozen=True)
class IdealStatement:
    kind: str
    pattern: FactorExpr
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return f"ideal {self.kind} {self.pattern.render()};"


@dataclass(frozen=True)
class ConditionStatement:
    label: str
    lhs: FactorExpr | None
    rhs: tuple[FactorExpr, ...]
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        lhs = "0" if self.lhs is None else self.lhs.render()
        rhs = ", ".join(f.render() for f in self.rhs)
        return f"condition ({self.label}) {lhs} = ({rhs});"


@dataclass(frozen=True)
class CompletionStatement:
    name: str
    phis: tuple[str, ...]
    Phis: tuple[str, ...]
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return (
            f"completion {self.name} := complete("
            f"{', '.join(self.phis)}; {', '.join(self.Phis)});"
        )


@dataclass(frozen=True)
class HypothesesStatement:
    name: str
    first: str
    second: str
    completions: tuple[str, ...]
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return (
            f"hypotheses {self.name} := closure("
            f"{self.first}, {self.second}; {', '.join(self.completions)});"
        )


@dataclass(frozen=True)
class ClassStatement:
    name: str
    phi: str
    completions: tuple[str, ...]
    line: int = field(default=0, compare=False)

    def render(self) -> str:
        return (
            f"class {self.name} := invariant("
            f"{self.phi}; {', '.join(self.completions)});"
        )


Statement = (
    SetStatement | GenStatement | IdealStatement | ConditionStatement
    | CompletionStatement | HypothesesStatement | ClassStatement
)


def print_session(statements: list[Statement]) -> str:
    return "\n".join(s.render() for s in statements) + "\n"


# --- tokenizer --------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<newline>\n)"
    r"|(?P<assign>:=)"
    r"|(?P<number>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<punct>[()\[\],;=\-])"
)


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise GdaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1, filename
            )
        kind = match.lastgroup
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind not in ("ws", "comment"):
            tokens.append(
                Token(kind, match.group(), line, match.start() - line_start + 1)
            )
        pos = match.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# --- parser -----------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, message: str, token: Token | None = None) -> GdaSyntaxError:
        tok = token or self.peek()
        return GdaSyntaxError(message, tok.line, tok.column, self.filename)

    def expect(self, text: str | None = None, kind: str | None = None) -> Token:
        tok = self.peek()
        if (kind is not None and tok.kind != kind) or (
            text is not None and tok.text != text
        ):
            want = repr(text) if text is not None else f"a {kind}"
            got = repr(tok.text) if tok.text else "end of input"
            raise self.error(f"expected {want}, got {got}")
        return self.advance()

    # pieces

    def hyphen_name(self) -> str:
        parts = [self.expect(kind="name").text]
        while (
            self.peek().text == "-"
            and self.pos + 1 < len(self.tokens)
            and self.tokens[self.pos + 1].kind == "name"
        ):
            self.advance()
            parts.append(self.expect(kind="name").text)
        return "-".join(parts)

    def signed_int(self) -> int:
        negative = False
        if self.peek().text == "-":
            self.advance()
            negative = True
        tok = self.expect(kind="number")
        value = int(tok.text)
        return -value if negative else value

    def index(self) -> Index:
        self.expect("(")
        n = self.signed_int()
        self.expect(",")
        m = self.signed_int()
        self.expect(",")
        kappa = self.signed_int()
        self.expect(")")
        return Index(n, m, kappa)

    def fexpr(self) -> FactorExpr:
        tok = self.expect(kind="name")
        if tok.text in ("d", "D") and self.peek().text == "(":
            self.advance()
            inner = self.fexpr()
            self.expect(")")
            return FactorExpr(inner.name, inner.wraps + (tok.text,), inner.r, inner.t)
        return FactorExpr(tok.text)

    def fexpr_with_overlap(self) -> FactorExpr:
        fe = self.fexpr()
        if self.peek().text == "[":
            self.advance()
            self.expect("r")
            self.expect("=")
            r = self.signed_int()
            self.expect(",")
            self.expect("t")
            self.expect("=")
            t = self.signed_int()
            self.expect("]")
            fe = FactorExpr(fe.name, fe.wraps, r, t)
        return fe

    def name_list(self) -> tuple[str, ...]:
        names = [self.expect(kind="name").text]
        while self.peek().text == ",":
            self.advance()
            names.append(self.expect(kind="name").text)
        return tuple(names)

    # statements

    def statement(self) -> Statement:
        head = self.expect(kind="name")
        handler = getattr(self, f"stmt_{head.text}", None)
        if handler is None:
            raise self.error(f"unknown statement {head.text!r}", head)
        return handler(head.line)

    def stmt_set(self, line: int) -> SetStatement:
        key = self.hyphen_name()
        if key == "bound":
            key = f"bound {self.hyphen_name()}"
        if self.peek().kind == "name":
            value = self.hyphen_name()
        else:
            value = str(self.signed_int())
        self.expect(";")
        return SetStatement(key, value, line)

    def stmt_gen(self, line: int) -> GenStatement:
        name = self.expect(kind="name").text
        self.expect("index")
        idx = self.index()
        flags: tuple[str, ...] = ()
        if self.peek().text == "flags":
            self.advance()
            self.expect("[")
            flags = self.name_list()
            self.expect("]")
        self.expect(";")
        return GenStatement(name, idx, flags, line)

    def stmt_ideal(self, line: int) -> IdealStatement:
        kind = self.expect(kind="name")
        if kind.text not in _IDEAL_KINDS:
            raise self.error(f"unknown ideal kind {kind.text!r}", kind)
        pattern = self.fexpr()
        self.expect(";")
        return IdealStatement(kind.text, pattern, line)

    def stmt_condition(self, line: int) -> ConditionStatement:
        self.expect("(")
        label = ""
        while self.peek().text != ")":
            if self.peek().kind == "end":
                raise self.error("unclosed condition label")
            label += self.advance().text
        self.expect(")")
        if self.peek().text == "0":
            self.advance()
            lhs = None
        else:
            lhs = self.fexpr()
        self.expect("=")
        self.expect("(")
        rhs = [self.fexpr_with_overlap()]
        while self.peek().text == ",":
            self.advance()
            rhs.append(self.fexpr_with_overlap())
        self.expect(")")
        self.expect(";")
        return ConditionStatement(label, lhs, tuple(rhs), line)

    def stmt_completion(self, line: int) -> CompletionStatement:
        name = self.expect(kind="name").text
        self.expect(kind="assign")
        self.expect("complete")
        self.expect("(")
        phis = self.name_list()
        self.expect(";")
        Phis = self.name_list()
        self.expect(")")
        self.expect(";")
        return CompletionStatement(name, phis, Phis, line)

    def stmt_hypotheses(self, line: int) -> HypothesesStatement:
        name = self.expect(kind="name").text
        self.expect(kind="assign")
        self.expect("closure")
        self.expect("(")
        first = self.expect(kind="name").text
        self.expect(",")
        second = self.expect(kind="name").text
        self.expect(";")
        comps = self.name_list()
        self.expect(")")
        self.expect(";")
        return HypothesesStatement(name, first, second, comps, line)

    def stmt_class(self, line: int) -> ClassStatement:
        name = self.expect(kind="name").text
        self.expect(kind="assign")
        self.expect("invariant")
        self.expect("(")
        phi = self.expect(kind="name").text
        self.expect(";")
        comps = self.name_list()
        self.expect(")")
        self.expect(";")
        return ClassStatement(name, phi, comps, line)


def parse_text(text: str, filename: str = "<input>") -> list[Statement]:
    parser = _Parser(tokenize(text, filename), filename)
    statements: list[Statement] = []
    while parser.peek().kind != "end":
        statements.append(parser.statement())
    return statements


def parse_file(path: str | Path) -> list[Statement]:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


# --- session building -------------------------------------------------

@dataclass
class Session:
    registry: SymbolRegistry
    ideals: IdealRegistry
    conditions: list[Condition]
    completions: dict[str, Completion]
    hypothesis_decls: dict[str, tuple[str, str, tuple[str, ...]]]
    class_decls: dict[str, tuple[str, tuple[str, ...]]]
    setup: VerifierSetup
    depth: int
    bounds: IndexBounds
    literal_m: bool
    statements: list[Statement]
    filename: str

    def factor(self, name: str) -> Factor:
        return Factor(self.registry.get(name))

    def closure_set(self, name: str | None = None) -> ClosureSet:
        if name is None:
            if len(self.hypothesis_decls) != 1:
                raise HypothesisError(
                    f"session declares {len(self.hypothesis_decls)} closure"
                    " sets; name one"
                )
            name = next(iter(self.hypothesis_decls))
        if name not in self.hypothesis_decls:
            raise NameClash(f"unknown closure set {name!r}")
        first, second, comps = self.hypothesis_decls[name]
        return build_closure_set(
            self.factor(first),
            self.factor(second),
            tuple(self.factor(c) for c in comps),
            self.ideals,
            self.setup,
        )

    def class_parts(self, name: str) -> tuple[Factor, tuple[Factor, ...]]:
        if name not in self.class_decls:
            raise NameClash(f"unknown class {name!r}")
        phi, comps = self.class_decls[name]
        return self.factor(phi), tuple(self.factor(c) for c in comps)

    def class_term(self, name: str) -> Term:
        phi, comps = self.class_parts(name)
        return build_class(phi, comps, self.setup)


def _on_off(value: str, key: str, line: int, filename: str) -> bool:
    if value == "on":
        return True
    if value == "off":
        return False
    raise GdaSyntaxError(f"{key} wants on or off, got {value!r}", line, 1, filename)


def build_session(statements: list[Statement], filename: str = "<input>") -> Session:
    registry = SymbolRegistry()
    ideals = IdealRegistry()
    setup = VerifierSetup()
    depth = 8
    literal_m = False
    bounds = IndexBounds()
    conditions: list[Condition] = []
    completions: dict[str, Completion] = {}
    hyps: dict[str, tuple[str, str, tuple[str, ...]]] = {}
    classes: dict[str, tuple[str, tuple[str, ...]]] = {}

    def wrap_kind(letter: str) -> DiffKind:
        return setup.d if letter == "d" else setup.d.other

    def resolve(fe: FactorExpr) -> Factor:
        sym = registry.get(fe.name)
        return Factor(sym, tuple(wrap_kind(w) for w in fe.wraps))

    for st in statements:
        try:
            if isinstance(st, SetStatement):
                key, value = st.key, st.value
                if key == "d":
                    if value not in ("delta", "Delta"):
                        raise GdaSyntaxError(
                            f"d must be delta or Delta, got {value!r}",
                            st.line, 1, filename,
                        )
                    setup = dc_replace(setup, d=DiffKind(value))
                elif key == "sign-mode":
                    setup = dc_replace(setup, sign=SignMode(value))
                elif key == "epsilon-mode":
                    setup = dc_replace(setup, epsilon_mode=EpsilonMode(value))
                elif key == "xi-mode":
                    setup = dc_replace(setup, xi_mode=XiMode(value))
                elif key == "depth":
                    depth = int(value)
                    if depth < 1:
                        raise GdaSyntaxError("depth must be at least 1", st.line, 1, filename)
                elif key == "literal-m-coherence":
                    literal_m = _on_off(value, key, st.line, filename)
                elif key == "Delta-chain-cochain":
                    setup = dc_replace(
                        setup,
                        laws=dc_replace(
                            setup.laws,
                            Delta_chain_cochain=_on_off(value, key, st.line, filename),
                        ),
                    )
                elif key == "commute":
                    setup = dc_replace(
                        setup,
                        laws=dc_replace(
                            setup.laws, commute=_on_off(value, key, st.line, filename)
                        ),
                    )
                elif key.startswith("bound "):
                    bound_key = key.split(" ", 1)[1]
                    if bound_key not in _BOUND_KEYS:
                        raise GdaSyntaxError(
                            f"unknown bound {bound_key!r}", st.line, 1, filename
                        )
                    bounds = dc_replace(bounds, **{_BOUND_KEYS[bound_key]: int(value)})
                else:
                    raise GdaSyntaxError(f"unknown setting {key!r}", st.line, 1, filename)
            elif isinstance(st, GenStatement):
                if st.name in ("d", "D"):
                    raise GdaSyntaxError(
                        f"generator name {st.name!r} is reserved", st.line, 1, filename
                    )
                closed: list[str] = []
                role = "plain"
                for flag in st.flags:
                    if flag in ("dclosed", "Dclosed"):
                        kind = setup.d if flag == "dclosed" else setup.d.other
                        closed.append(f"{kind.token}closed")
                    elif flag in ("picked", "completion"):
                        role = flag
                    else:
                        raise GdaSyntaxError(
                            f"unknown flag {flag!r}", st.line, 1, filename
                        )
                bounds.check(st.index, st.name)
                registry.declare(st.name, st.index, closed, role)
            elif isinstance(st, IdealStatement):
                if st.pattern.r or st.pattern.t:
                    raise GdaSyntaxError(
                        "ideal patterns take no overlap suffix", st.line, 1, filename
                    )
                ideals.register(IdealKind(st.kind), resolve(st.pattern), setup.laws)
            elif isinstance(st, ConditionStatement):
                factors = [resolve(fe) for fe in st.rhs]
                overlaps = tuple((fe.r, fe.t) for fe in st.rhs)
                mono = Monomial(tuple(factors), overlaps)
                sig = mono.signature()
                if st.label != sig:
                    raise GdaSyntaxError(
                        f"label ({st.label}) does not match the right-hand"
                        f" side signature ({sig})",
                        st.line, 1, filename,
                    )
                rhs = normalize(Term.from_monomial(mono), setup.laws)
                if st.lhs is None:
                    lhs = Term.zero()
                    expected = ZERO_INDEX
                else:
                    lhs_factor = resolve(st.lhs)
                    lhs = normalize(Term.from_factor(lhs_factor), setup.laws)
                    expected = lhs_factor.effective_index
                cond = Condition(st.label, lhs, rhs, expected)
                check_coherence(cond, literal_m)
                conditions.append(cond)
            elif isinstance(st, CompletionStatement):
                if st.name in completions:
                    raise GdaSyntaxError(
                        f"completion {st.name!r} already defined", st.line, 1, filename
                    )
                completions[st.name] = make_completion(
                    [Factor(registry.get(n)) for n in st.phis],
                    [Factor(registry.get(n)) for n in st.Phis],
                )
            elif isinstance(st, HypothesesStatement):
                if st.name in hyps:
                    raise GdaSyntaxError(
                        f"closure set {st.name!r} already defined", st.line, 1, filename
                    )
                for n in (st.first, st.second, *st.completions):
                    registry.get(n)
                if len(st.completions) != 4:
                    raise GdaSyntaxError(
                        "closure needs exactly 4 completion factors",
                        st.line, 1, filename,
                    )
                hyps[st.name] = (st.first, st.second, st.completions)
            elif isinstance(st, ClassStatement):
                if st.name in classes:
                    raise GdaSyntaxError(
                        f"class {st.name!r} already defined", st.line, 1, filename
                    )
                for n in (st.phi, *st.completions):
                    registry.get(n)
                if len(st.completions) != 4:
                    raise GdaSyntaxError(
                        "a class needs exactly 4 completion factors",
                        st.line, 1, filename,
                    )
                classes[st.name] = (st.phi, st.completions)
            else:
                raise GdaSyntaxError(
                    f"unhandled statement {type(st).__name__}", st.line, 1, filename
                )
        except GdaSyntaxError:
            raise
        except (GdaError, ValueError) as err:
            raise GdaSyntaxError(str(err), st.line, 1, filename) from err

    return Session(
        registry, ideals, conditions, completions, hyps, classes,
        setup, depth, bounds, literal_m, list(statements), filename,
    )


def load_session(path: str | Path) -> Session:
    path = Path(path)
    return build_session(parse_file(path), str(path))
