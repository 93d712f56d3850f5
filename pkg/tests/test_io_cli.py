import json

import numpy as np
import pytest

from semiquantum.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, main, parse_bipartition
from semiquantum.game import canonical_prover_strategy, evaluate_payoff, wp_game
from semiquantum.io import (
    FormatError,
    dump_json,
    game_from_json,
    game_to_json,
    load_json,
    operator_from_json,
    operator_to_json,
    povm_from_json,
    povm_to_json,
    state_from_json,
    state_to_json,
    strategy_from_json,
    strategy_to_json,
    write_operator,
)
from semiquantum.operators import HermitianOperator, InvalidArgumentError, Povm, phi_plus
from semiquantum.popt import make_wp
from semiquantum.random import haar_state, random_density, random_two_outcome_povm, substream


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def write_state(tmp_path, op, name="w.json"):
    path = tmp_path / name
    write_operator(op, path)
    return str(path)


def test_operator_roundtrip():
    op = random_density((2, 3), substream(50))
    back = operator_from_json(json.loads(dump_json(operator_to_json(op))))
    assert back.dims == (2, 3) and np.array_equal(back.matrix, op.matrix)


def test_state_roundtrip():
    s = haar_state((2, 2), substream(51))
    back = state_from_json(state_to_json(s))
    assert np.array_equal(back.amplitudes, s.amplitudes)


def test_povm_roundtrip():
    povm = random_two_outcome_povm((2,), substream(52))
    back = povm_from_json(povm_to_json(povm))
    assert all(np.allclose(a.matrix, b.matrix) for a, b in zip(povm, back))


def test_game_roundtrip():
    game = wp_game()
    back = game_from_json(json.loads(dump_json(game_to_json(game))))
    assert np.array_equal(back.beta, game.beta)
    assert np.allclose(back.witness.matrix, game.witness.matrix)
    strategy = canonical_prover_strategy(make_wp(0.6))
    assert evaluate_payoff(back, strategy).payoff == evaluate_payoff(game, strategy).payoff


def test_strategy_roundtrip():
    strategy = canonical_prover_strategy(make_wp(0.6))
    back = strategy_from_json(strategy_to_json(strategy), make_wp(0.6).op)
    assert np.allclose(back.measurements[1][1].matrix, strategy.measurements[1][1].matrix)


def test_nonhermitian_rejected_and_allowed():
    doc = {"dims": [2], "re": [[1, 1], [0, 0]], "im": [[0, 0], [0, 0]]}
    with pytest.raises(InvalidArgumentError):
        operator_from_json(doc)
    op = operator_from_json(doc, allow_nonhermitian=True)
    assert np.allclose(op.matrix, [[1, 0.5], [0.5, 0]])


@pytest.mark.parametrize(
    "doc",
    [
        {"re": [[1]]},
        {"dims": [2], "re": [[1, 0], [0, 1]], "im": [[0, 0]]},
        {"dims": [2], "re": [[1, 0, 0]]},
        {"dims": [0], "re": [[1]]},
        {"dims": [2], "re": "abc"},
    ],
)
def test_operator_format_errors(doc):
    with pytest.raises(FormatError):
        operator_from_json(doc)


def test_game_format_errors():
    with pytest.raises(FormatError):
        game_from_json({"inputs": []})
    doc = game_to_json(wp_game())
    doc["scored_outcome"] = "any"
    with pytest.raises(FormatError):
        game_from_json(doc)
    doc = game_to_json(wp_game())
    doc["beta"].append({"s": [9, 9], "value": 1})
    with pytest.raises(FormatError):
        game_from_json(doc)


def test_load_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    with pytest.raises(FormatError, match="line 1"):
        load_json(bad)
    with pytest.raises(FormatError):
        load_json(tmp_path / "missing.json")


def test_parse_bipartition():
    assert parse_bipartition(None, 2) is None
    assert parse_bipartition("2|2", 4) == [[0, 1], [2, 3]]
    assert parse_bipartition("0,2|1,3", 4) == [[0, 2], [1, 3]]
    assert parse_bipartition("0|1", 2) == [[0], [1]]


def test_cli_certify_wp(tmp_path, capsys):
    path = write_state(tmp_path, make_wp(0.5).op)
    game_out = tmp_path / "game.json"
    code, out = run(capsys, "certify", path, "--trials", "20", "--restarts", "4", "--game-out", str(game_out))
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["verdict"] == "BeyondQuantumCertified"
    assert doc["payoff"] == pytest.approx(-1 / 32, abs=1e-12)
    assert doc["quantum_positivity_min"] >= -1e-12
    assert {"command", "version", "seed"} <= set(doc)
    assert game_from_json(load_json(game_out)).beta.shape == (4, 4)


def test_cli_certify_quantum_state(tmp_path, capsys):
    path = write_state(tmp_path, random_density((2, 2), substream(53)))
    code, out = run(capsys, "certify", path, "--restarts", "2")
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["verdict"] == "Inconclusive"


def test_cli_certify_not_popt(tmp_path, capsys):
    path = write_state(tmp_path, HermitianOperator(np.diag([-0.5, 0.5, 0.5, 0.5]), (2, 2)))
    code, out = run(capsys, "certify", path, "--trials", "5", "--restarts", "2")
    doc = json.loads(out)
    assert code == EXIT_INCONCLUSIVE
    assert doc["classification"]["verdict"] == "NotPopt"


def test_cli_bad_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["certify", str(bad)]) == EXIT_ERROR
    nonherm = tmp_path / "nh.json"
    nonherm.write_text(json.dumps({"dims": [2, 2], "re": (np.triu(np.ones((4, 4))) / 4).tolist()}))
    assert main(["popt-check", str(nonherm)]) == EXIT_ERROR
    assert main(["popt-check", str(nonherm), "--allow-nonhermitian", "--restarts", "2"]) == EXIT_OK
    assert main(["wp", "--p", "1.5"]) == EXIT_ERROR
    with pytest.raises(SystemExit) as exc:
        main(["wp"])
    assert exc.value.code == EXIT_ERROR
    capsys.readouterr()


@pytest.mark.parametrize("p, code, payoff", [(1.0, EXIT_OK, -0.125), (0.3, EXIT_INCONCLUSIVE, 0.00625)])
def test_cli_wp(capsys, p, code, payoff):
    got, out = run(capsys, "wp", "--p", str(p), "--restarts", "2")
    doc = json.loads(out)
    assert got == code
    assert doc["payoff"] == pytest.approx(payoff, abs=1e-12)
    assert doc["analytic_payoff"] == pytest.approx(payoff, abs=1e-12)


def test_cli_global_flags_either_side(capsys):
    a = run(capsys, "--seed", "3", "wp", "--p", "0.5", "--restarts", "2")
    b = run(capsys, "wp", "--p", "0.5", "--restarts", "2", "--seed", "3")
    assert a == b
    assert json.loads(a[1])["seed"] == 3


def test_cli_text_format(capsys):
    code, out = run(capsys, "wp", "--p", "1", "--format", "text", "--restarts", "2")
    assert code == EXIT_OK
    assert "payoff" in out and not out.lstrip().startswith("{")


def test_cli_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out = run(capsys, "wp", "--p", "0.5", "--restarts", "2", "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert load_json(target)["verdict"] == "BeyondQuantumCertified"


def test_cli_lhv(capsys):
    code, out = run(capsys, "lhv", "--model", "barrett", "--samples", "20000", "--seed", "1")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert len(doc["cells"]) == 12 and not doc["flagged"]
    code, out = run(capsys, "lhv", "--model", "werner", "--p", "0.9", "--samples", "5000")
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["flagged"]


def test_cli_lhv_custom_povm(tmp_path, capsys):
    povm = Povm.two_outcome(HermitianOperator(np.diag([1.0, 0.0]), (2,)))
    path = tmp_path / "povm.json"
    dump_json(povm_to_json(povm), path)
    code, out = run(capsys, "lhv", "--model", "werner", "--povm-a", str(path), "--samples", "5000")
    assert code == EXIT_OK and len(json.loads(out)["cells"]) == 4


def test_cli_lhv_deterministic(capsys):
    argv = ("lhv", "--model", "barrett", "--samples", "30000", "--seed", "7")
    first = run(capsys, *argv)
    second = run(capsys, *argv, "--workers", "3")
    assert first[1] == second[1]


def test_cli_popt_check(tmp_path, capsys):
    path = write_state(tmp_path, make_wp(0.9).op)
    code, out = run(capsys, "popt-check", path, "--restarts", "4")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "BeyondQuantumCandidate"
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    composed = np.kron(make_wp(0.5).op.matrix, np.outer(psi, psi)).reshape([2] * 8)
    composed = composed.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
    path = write_state(tmp_path, HermitianOperator(composed, (2, 2, 2, 2)), "c.json")
    code, out = run(capsys, "popt-check", path, "--bipartition", "2|2", "--restarts", "8")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["verdict"] == "NotPopt"
    assert doc["product_min"] < 0


def test_cli_payoff(tmp_path, capsys):
    game_path = tmp_path / "game.json"
    dump_json(game_to_json(wp_game()), game_path)
    state = write_state(tmp_path, make_wp(0.5).op)
    code, out = run(capsys, "payoff", "--game", str(game_path), "--state", state)
    assert code == EXIT_OK and json.loads(out)["payoff"] == pytest.approx(-1 / 32)
    # scoring on the complement of P+ for both parties
    comp = HermitianOperator(np.eye(4) - phi_plus(2).projector().matrix, (2, 2))
    strat = tmp_path / "strategy.json"
    dump_json({"measurements": [operator_to_json(comp)] * 2}, strat)
    code, out = run(capsys, "payoff", "--game", str(game_path), "--state", state, "--strategy", str(strat))
    doc = json.loads(out)
    assert doc["strategy"] == str(strat)
    expected = evaluate_payoff(wp_game(), strategy_from_json(load_json(strat), make_wp(0.5).op)).payoff
    assert doc["payoff"] == pytest.approx(expected, abs=1e-12)
    assert code == (EXIT_OK if expected < -1e-9 else EXIT_INCONCLUSIVE)
