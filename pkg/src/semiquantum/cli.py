"""Command-line front end.

Exit codes: 0 for success or a certified verdict, 2 for an inconclusive
verdict, 1 for any error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .game import (
    CONSISTENCY_TOL,
    GameVerdict,
    NoNegativeEigenvalueError,
    analytic_report,
    canonical_prover_strategy,
    evaluate_payoff,
    quantum_positivity_check,
    synthesize_game,
    wp_game,
)
from .io import dump_json, game_to_json, load_json, read_game, read_operator, read_povm, strategy_from_json
from .lhv import BARRETT_P, WERNER_P, born_table, lhv_joint_mc, model_for_p
from .operators import HERMITIAN_TOL, PSD_TOL, InvalidArgumentError, Povm, bloch_projector
from .popt import POPT_TOL, SEESAW_ITERS, SEESAW_RESTARTS, Verdict, classify, make_wp

log = logging.getLogger("semiquantum")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
DEFAULT_SAMPLES = 1_000_000
DEFAULT_TRIALS = 1000


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def _text_lines(doc: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines += _text_lines(value, name + ".")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for k, item in enumerate(value):
                lines += _text_lines(item, f"{name}[{k}].")
        else:
            lines.append(f"{name}: {_fmt(value)}")
    return lines


def emit(doc: dict, args: argparse.Namespace) -> None:
    text = dump_json(doc) if args.format == "json" else "\n".join(_text_lines(doc)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header(command: str, args: argparse.Namespace, **tolerances: float) -> dict:
    tol = {"hermitian": HERMITIAN_TOL, "psd": PSD_TOL, "report": args.tol}
    tol.update(tolerances)
    return {"command": command, "version": __version__, "seed": args.seed, "tolerances": tol}


def parse_bipartition(text: str | None, n: int) -> list[list[int]] | None:
    """``"2|2"`` (group sizes, contiguous) or ``"0,2|1,3"`` (0-based index groups).

    Bare integers are read as sizes when they sum to ``n``; otherwise each
    one is a single index.
    """
    if text is None:
        return None
    try:
        groups = [[int(t) for t in part.split(",")] for part in text.split("|")]
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse bipartition {text!r}") from exc
    if all(len(g) == 1 for g in groups):
        sizes = [g[0] for g in groups]
        if all(s > 0 for s in sizes) and sum(sizes) == n:
            bounds = np.cumsum([0] + sizes)
            return [list(range(bounds[k], bounds[k + 1])) for k in range(len(sizes))]
    return groups


def _read_op(path: str, args: argparse.Namespace):
    return read_operator(path, allow_nonhermitian=args.allow_nonhermitian)


def cmd_certify(args: argparse.Namespace) -> int:
    w = _read_op(args.path, args)
    report = _header("certify", args, popt=args.popt_tol, consistency=CONSISTENCY_TOL)
    report["input"] = args.path
    cls = classify(w, restarts=args.restarts, iters=args.iters, seed=args.seed, popt_tol=args.popt_tol)
    report["classification"] = cls.to_dict()
    if cls.verdict is Verdict.QUANTUM:
        report["verdict"] = GameVerdict.INCONCLUSIVE.value
        report["reason"] = "operator is PSD; no witness exists"
        emit(report, args)
        return EXIT_INCONCLUSIVE
    try:
        game, chi = synthesize_game(w)
    except NoNegativeEigenvalueError as exc:
        report["verdict"] = GameVerdict.INCONCLUSIVE.value
        report["reason"] = str(exc)
        emit(report, args)
        return EXIT_INCONCLUSIVE
    strategy = canonical_prover_strategy(w)
    exact = evaluate_payoff(game, strategy, tol=args.tol)
    analytic = analytic_report(game, w, tol=args.tol)
    gap = abs(exact.payoff - analytic.payoff)
    if gap > CONSISTENCY_TOL:
        raise ArithmeticError(f"exact and analytic payoffs differ by {gap:.3e}")
    report["payoff"] = exact.payoff
    report["reports"] = [exact.to_dict(args.seed), analytic.to_dict(args.seed)]
    report["quantum_positivity_min"] = quantum_positivity_check(game, trials=args.trials, seed=args.seed)
    report["quantum_positivity_trials"] = args.trials
    report["game"] = game_to_json(game)
    if args.game_out:
        dump_json(game_to_json(game), args.game_out)
    certified = exact.verdict is GameVerdict.CERTIFIED
    if cls.verdict is Verdict.NOT_POPT:
        # the no-quantum-strategy guarantee needs a POPT input; a refuted input is not one
        certified = False
        report["reason"] = "seesaw found a negative product expectation: input is not POPT"
    report["verdict"] = (GameVerdict.CERTIFIED if certified else GameVerdict.INCONCLUSIVE).value
    emit(report, args)
    return EXIT_OK if certified else EXIT_INCONCLUSIVE


def cmd_wp(args: argparse.Namespace) -> int:
    state = make_wp(args.p)
    report = _header("wp", args)
    report["p"] = args.p
    report["eigenvalues"] = state.op.eigvalsh().tolist()
    cls = classify(state, restarts=args.restarts, iters=args.iters, seed=args.seed)
    report["classification"] = cls.to_dict()
    game = wp_game()
    strategy = canonical_prover_strategy(state)
    exact = evaluate_payoff(game, strategy, tol=args.tol)
    analytic = analytic_report(game, state, tol=args.tol)
    report["payoff"] = exact.payoff
    report["analytic_payoff"] = analytic.payoff
    report["verdict"] = exact.verdict.value
    emit(report, args)
    return EXIT_OK if exact.verdict is GameVerdict.CERTIFIED else EXIT_INCONCLUSIVE


def default_povms(model: str) -> tuple[Povm, Povm]:
    """Trine vs tetrahedral POVMs for the POVM model; two tilted projective measurements otherwise."""
    if model == "werner":
        n = np.array([math.sqrt(3) / 2, 0.0, 0.5])
        z = np.array([0.0, 0.0, 1.0])
        return Povm((bloch_projector(z), bloch_projector(-z))), Povm((bloch_projector(n), bloch_projector(-n)))
    trine = [np.array([math.sin(t), 0.0, math.cos(t)]) for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    tetra = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)
    a = Povm(tuple(bloch_projector(n) * (2 / 3) for n in trine))
    b = Povm(tuple(bloch_projector(n) * 0.5 for n in tetra))
    return a, b


def cmd_lhv(args: argparse.Namespace) -> int:
    threshold = BARRETT_P if args.model == "barrett" else WERNER_P
    p = threshold if args.p is None else args.p
    a, b = default_povms(args.model)
    if args.povm_a:
        a = read_povm(args.povm_a)
    if args.povm_b:
        b = read_povm(args.povm_b)
    model = model_for_p(args.model, p)
    valid = p <= threshold + 1e-12
    if not valid:
        log.warning("p = %s exceeds the %s model threshold %s; responses may leave [0, 1]", p, args.model, threshold)
    table = lhv_joint_mc(model, a, b, samples=args.samples, seed=args.seed, workers=args.workers)
    born = born_table(model.state, a, b)
    report = _header("lhv", args)
    report.update(table.to_dict(born))
    report["p"] = p
    report["threshold"] = threshold
    report["valid"] = valid
    report["max_abs_z"] = float(np.max(np.abs(table.z_scores(born))))
    flagged = not valid or table.out_of_range > 0
    report["flagged"] = flagged
    emit(report, args)
    return EXIT_INCONCLUSIVE if flagged else EXIT_OK


def cmd_popt_check(args: argparse.Namespace) -> int:
    w = _read_op(args.path, args)
    groups = parse_bipartition(args.bipartition, w.n_parties)
    cls = classify(w, restarts=args.restarts, iters=args.iters, seed=args.seed,
                   popt_tol=args.popt_tol, bipartition=groups)
    report = _header("popt-check", args, popt=args.popt_tol)
    report["input"] = args.path
    report["bipartition"] = groups
    report["restarts"] = args.restarts
    report["iters"] = args.iters
    report.update(cls.to_dict())
    emit(report, args)
    return EXIT_OK


def cmd_payoff(args: argparse.Namespace) -> int:
    game = read_game(args.game)
    w = _read_op(args.state, args)
    if args.strategy:
        strategy = strategy_from_json(load_json(args.strategy), w, what=args.strategy)
    else:
        strategy = canonical_prover_strategy(w)
    exact = evaluate_payoff(game, strategy, tol=args.tol)
    report = _header("payoff", args)
    report["strategy"] = args.strategy or "canonical"
    report["payoff"] = exact.payoff
    report["reports"] = [exact.to_dict(args.seed)]
    if game.witness is not None and not args.strategy:
        report["reports"].append(analytic_report(game, w, tol=args.tol).to_dict(args.seed))
    report["verdict"] = exact.verdict.value
    emit(report, args)
    return EXIT_OK if exact.verdict is GameVerdict.CERTIFIED else EXIT_INCONCLUSIVE


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=default(0), help="master seed (default 0)")
    parser.add_argument("--samples", type=_positive_int, default=default(DEFAULT_SAMPLES), help="Monte Carlo samples")
    parser.add_argument("--tol", type=_positive_float, default=default(1e-9), help="payoff threshold for certification")
    parser.add_argument("--format", choices=("json", "text"), default=default("json"))
    parser.add_argument("--out", default=default(None), help="write the report here instead of stdout")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for inconclusive verdicts."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semiquantum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    def seesaw_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--restarts", type=_positive_int, default=SEESAW_RESTARTS)
        p.add_argument("--iters", type=_positive_int, default=SEESAW_ITERS)
        p.add_argument("--popt-tol", type=_positive_float, default=POPT_TOL)

    p = add("certify", cmd_certify, "synthesize and evaluate a game for an operator file")
    p.add_argument("path")
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS, help="random quantum strategies to test")
    p.add_argument("--game-out", help="also write the synthesized game here")
    p.add_argument("--allow-nonhermitian", action="store_true")
    seesaw_flags(p)

    p = add("wp", cmd_wp, "W_p demo: spectrum, classification and game payoff")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--restarts", type=_positive_int, default=SEESAW_RESTARTS)
    p.add_argument("--iters", type=_positive_int, default=SEESAW_ITERS)

    p = add("lhv", cmd_lhv, "Monte Carlo run of a hidden-variable model against Born statistics")
    p.add_argument("--model", choices=("barrett", "werner"), required=True)
    p.add_argument("--p", type=float, default=None, help="defaults to the model's threshold")
    p.add_argument("--povm-a")
    p.add_argument("--povm-b")
    p.add_argument("--workers", type=_positive_int, default=1)

    p = add("popt-check", cmd_popt_check, "PSD test and seesaw refutation of POPT-ness")
    p.add_argument("path")
    p.add_argument("--bipartition", help="'2|2' for contiguous group sizes or '0,2|1,3' for index groups")
    p.add_argument("--allow-nonhermitian", action="store_true")
    seesaw_flags(p)

    p = add("payoff", cmd_payoff, "evaluate a game on a state with a given (or canonical) strategy")
    p.add_argument("--game", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--strategy", help="JSON with the scored effect of each party; canonical if omitted")
    p.add_argument("--allow-nonhermitian", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
