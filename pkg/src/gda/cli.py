"""Command line front end.

Exit codes: 0 when the requested check passes, 1 when a verification
runs to completion and fails, 2 for malformed input, bad configuration,
or any other deliberate error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace as dc_replace

from .conditions import derive_tree, render_tree, standard_start, tree_to_json
from .differentials import EpsilonMode, SignMode, apply_differential
from .dsl import load_session, parse_file, print_session
from .errors import GdaError, GdaSyntaxError, ModelError
from .model import (
    corner_model,
    derive_element,
    evaluate,
    raising_model,
    random_element,
)
from .terms import (
    DEFAULT_LAWS,
    DiffKind,
    Factor,
    Monomial,
    SymbolRegistry,
    Term,
    render_term,
)
from .verifier import (
    VerificationReport,
    XiMode,
    verify_cocycle,
    verify_independence,
)

_FIELD_FOR_SIGN = {SignMode.paper_literal: "gf2", SignMode.koszul: "q"}


def _print_report(report: VerificationReport, mode: str) -> int:
    if mode == "json":
        sys.stdout.write(
            json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"
        )
    else:
        lines = [
            f"claim: {report.claim}",
            f"status: {report.status}",
            f"residual: {render_term(report.residual)}",
            "trace:",
        ]
        for step in report.trace:
            lines.append(f"  {step.rule}: {step.before} -> {step.after}")
        if report.primitive is not None:
            lines.append(f"primitive: {render_term(report.primitive)}")
        if report.notes:
            lines.append("notes:")
            lines.extend(f"  {note}" for note in report.notes)
        sys.stdout.write("\n".join(lines) + "\n")
    return 0 if report.ok else 1


def _apply_overrides(session, args) -> None:
    setup = session.setup
    if getattr(args, "sign_mode", None):
        setup = dc_replace(setup, sign=SignMode(args.sign_mode))
    if getattr(args, "epsilon_mode", None):
        setup = dc_replace(setup, epsilon_mode=EpsilonMode(args.epsilon_mode))
    if getattr(args, "xi_mode", None):
        setup = dc_replace(setup, xi_mode=XiMode(args.xi_mode))
    if getattr(args, "d", None):
        setup = dc_replace(setup, d=DiffKind(args.d))
    if getattr(args, "literal_m_coherence", False):
        session.literal_m = True
    if getattr(args, "depth", None):
        session.depth = args.depth
    session.setup = setup


def _cmd_check(args) -> int:
    session = load_session(args.file)
    _apply_overrides(session, args)
    report = VerificationReport(
        "check", "ok", Term.zero(), [],
        notes=[
            f"statements: {len(session.statements)}",
            f"conditions checked: {len(session.conditions)}",
        ],
    )
    return _print_report(report, args.report)


def _cmd_print(args) -> int:
    statements = parse_file(args.file)
    sys.stdout.write(print_session(statements))
    return 0


def _cmd_derive(args) -> int:
    registry = SymbolRegistry()
    sign = SignMode(args.sign_mode) if args.sign_mode else SignMode.paper_literal
    d = DiffKind(args.d) if args.d else DiffKind.delta
    depth = args.depth or 8
    pattern = args.start.strip("()")
    start = standard_start(pattern, registry, d, sign, DEFAULT_LAWS)
    tree = derive_tree(start, depth, sign, d, DEFAULT_LAWS, registry)
    if args.report == "json":
        sys.stdout.write(json.dumps(tree_to_json(tree), sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(render_tree(tree))
    return 0


def _cmd_verify_class(args) -> int:
    session = load_session(args.file)
    _apply_overrides(session, args)
    class_term = session.class_term(args.class_name)
    closure_set = session.closure_set(args.hypotheses)
    report = verify_cocycle(class_term, closure_set, session.ideals, session.setup)
    return _print_report(report, args.report)


def _cmd_verify_independence(args) -> int:
    session = load_session(args.file)
    _apply_overrides(session, args)
    phi, completions = session.class_parts(args.class_name)
    eta = session.factor(args.eta)
    closure_set = session.closure_set(args.hypotheses)
    report = verify_independence(
        phi, eta, completions, closure_set, session.ideals, session.setup
    )
    return _print_report(report, args.report)


def _cmd_model_check(args) -> int:
    session = load_session(args.file)
    _apply_overrides(session, args)
    field_name = args.field or _FIELD_FOR_SIGN[session.setup.sign]
    if _FIELD_FOR_SIGN[session.setup.sign] != field_name:
        raise ModelError(
            f"sign mode {session.setup.sign.value} pairs with the"
            f" {_FIELD_FOR_SIGN[session.setup.sign]} model, not {field_name}"
        )
    model = corner_model() if field_name == "gf2" else raising_model()
    d = session.setup.d
    if d not in model.tables:
        raise ModelError(f"the {field_name} model has no table for {d.token}")
    rng = random.Random(args.seed)
    gens = [
        session.registry.get(name)
        for name in session.registry.names()
        if not session.registry.get(name).fresh
    ]
    notes: list[str] = []
    status = "ok"
    if not gens:
        notes.append("no generators declared; nothing to sample")
    else:
        stack_options = [()] + [(kind,) for kind in model.tables]
        for trial in range(args.trials):
            arity = rng.randint(1, 3)
            factors = tuple(
                Factor(rng.choice(gens), rng.choice(stack_options))
                for _ in range(arity)
            )
            term = Term.from_monomial(Monomial(factors))
            assignment = {}
            for sym in gens:
                parity = sym.index.n % 2 if model.field == "q" else None
                assignment[sym.name] = random_element(model, rng, parity)
            symbolic = apply_differential(
                d, term, session.setup.sign, session.setup.laws
            )
            left = evaluate(symbolic, model, assignment)
            right = derive_element(model, d, evaluate(term, model, assignment))
            if left != right:
                status = "fail"
                notes.append(f"trial {trial}: mismatch for {render_term(term)}")
    report = VerificationReport("model", status, Term.zero(), [], notes=notes)
    return _print_report(report, args.report)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", choices=["text", "json"], default="text")
    common.add_argument("--seed", type=int, default=0)
    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("--sign-mode", choices=["paper", "koszul"])
    overrides.add_argument("--epsilon-mode", choices=["pair", "drop"])
    overrides.add_argument("--xi-mode", choices=["sum", "pairs"])
    overrides.add_argument("--d", choices=["delta", "Delta"])
    overrides.add_argument("--depth", type=int)
    overrides.add_argument("--literal-m-coherence", action="store_true")

    parser = argparse.ArgumentParser(
        prog="gda",
        description="Work with graded differential sessions: derive"
        " consequence trees, verify classes, spot-check in finite models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, overrides],
                       help="parse and validate a session file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("print", parents=[common],
                       help="reprint a session file canonically")
    p.add_argument("file")
    p.set_defaults(func=_cmd_print)

    p = sub.add_parser("derive", parents=[common, overrides],
                       help="expand the consequence tree of a start pattern")
    p.add_argument("--start", required=True, metavar="PATTERN")
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("verify-class", parents=[common, overrides],
                       help="check that a declared class is a cocycle")
    p.add_argument("file")
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--hypotheses")
    p.set_defaults(func=_cmd_verify_class)

    p = sub.add_parser("verify-independence", parents=[common, overrides],
                       help="check the class shift against a reconstructed primitive")
    p.add_argument("file")
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--hypotheses")
    p.set_defaults(func=_cmd_verify_independence)

    p = sub.add_parser("model-check", parents=[common, overrides],
                       help="evaluate the symbolic differential in a finite model")
    p.add_argument("file")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--field", choices=["q", "gf2"])
    p.set_defaults(func=_cmd_model_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GdaSyntaxError as err:
        print(str(err), file=sys.stderr)
        return 2
    except GdaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
