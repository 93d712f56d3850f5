"""JSON readers and writers for operators, states, POVMs, games and strategies.

Operators and states share one layout: ``{"dims": [...], "re": ..., "im": ...}``
with row-major real and imaginary parts (nested lists for matrices, flat
lists for state vectors).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from .operators import HERMITIAN_TOL, HermitianOperator, InvalidArgumentError, Povm, PureState, hermiticity_error
from .game import ProverStrategy, SemiquantumGame

log = logging.getLogger(__name__)


class FormatError(InvalidArgumentError):
    """A file or document does not follow the expected JSON layout."""


def load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc


def dump_json(doc: Any, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _complex_array(doc: dict, what: str) -> np.ndarray:
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except KeyError as exc:
        raise FormatError(f"{what}: missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: entries must be numeric arrays ({exc})") from exc
    if re.shape != im.shape:
        raise FormatError(f"{what}: 're' has shape {re.shape} but 'im' has shape {im.shape}")
    return re + 1j * im


def _dims(doc: dict, what: str) -> tuple[int, ...]:
    if not isinstance(doc, dict) or "dims" not in doc:
        raise FormatError(f"{what}: expected an object with a 'dims' list")
    dims = doc["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d > 0 for d in dims):
        raise FormatError(f"{what}: 'dims' must be a nonempty list of positive integers")
    return tuple(dims)


def operator_to_json(op: HermitianOperator) -> dict:
    return {"dims": list(op.dims), "re": op.matrix.real.tolist(), "im": op.matrix.imag.tolist()}


def operator_from_json(doc: dict, allow_nonhermitian: bool = False, what: str = "operator") -> HermitianOperator:
    """Parse an operator; non-Hermitian input is rejected unless allowed.

    With ``allow_nonhermitian`` the Hermitian part ``(A + A^dag)/2`` is kept.
    """
    dims = _dims(doc, what)
    m = _complex_array(doc, what)
    side = int(np.prod(dims))
    if m.shape != (side, side):
        raise FormatError(f"{what}: matrix shape {m.shape} does not match dims {list(dims)}")
    err = hermiticity_error(m)
    if err > HERMITIAN_TOL:
        if not allow_nonhermitian:
            raise InvalidArgumentError(f"{what}: not Hermitian (|A - A^dag|_F = {err:.3e})")
        log.warning("%s: keeping the Hermitian part of a non-Hermitian matrix (error %.3e)", what, err)
        m = 0.5 * (m + m.conj().T)
    return HermitianOperator(m, dims)


def state_to_json(state: PureState) -> dict:
    amp = state.amplitudes
    return {"dims": list(state.dims), "re": amp.real.tolist(), "im": amp.imag.tolist()}


def state_from_json(doc: dict, what: str = "state") -> PureState:
    dims = _dims(doc, what)
    v = _complex_array(doc, what)
    if v.shape != (int(np.prod(dims)),):
        raise FormatError(f"{what}: amplitude vector shape {v.shape} does not match dims {list(dims)}")
    return PureState(v, dims)


def povm_to_json(povm: Povm) -> dict:
    return {"effects": [operator_to_json(e) for e in povm]}


def povm_from_json(doc: dict, what: str = "povm") -> Povm:
    if not isinstance(doc, dict) or not isinstance(doc.get("effects"), list):
        raise FormatError(f"{what}: expected an object with an 'effects' list")
    return Povm(tuple(operator_from_json(e, what=f"{what} effect {k}") for k, e in enumerate(doc["effects"])))


def game_to_json(game: SemiquantumGame) -> dict:
    doc = {
        "parties": game.parties,
        "inputs": [[state_to_json(s) for s in states] for states in game.inputs],
        "beta": [{"s": list(idx), "value": value} for idx, value in game.nonzero()],
        "scored_outcome": "all_ones",
    }
    if game.witness is not None:
        doc["witness"] = operator_to_json(game.witness)
    return doc


def game_from_json(doc: dict, what: str = "game") -> SemiquantumGame:
    if not isinstance(doc, dict):
        raise FormatError(f"{what}: expected an object")
    if doc.get("scored_outcome", "all_ones") != "all_ones":
        raise FormatError(f"{what}: only the 'all_ones' scored outcome is supported")
    try:
        inputs = [[state_from_json(s, f"{what} input {i}/{k}") for k, s in enumerate(states)]
                  for i, states in enumerate(doc["inputs"])]
        entries = doc["beta"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{what}: missing or malformed 'inputs'/'beta' ({exc})") from exc
    if "parties" in doc and doc["parties"] != len(inputs):
        raise FormatError(f"{what}: 'parties' is {doc['parties']} but {len(inputs)} input lists given")
    beta = np.zeros(tuple(len(s) for s in inputs))
    for entry in entries:
        try:
            beta[tuple(entry["s"])] = float(entry["value"])
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise FormatError(f"{what}: bad beta entry {entry!r}") from exc
    witness = operator_from_json(doc["witness"], what=f"{what} witness") if doc.get("witness") else None
    return SemiquantumGame(inputs, beta, witness=witness)


def strategy_to_json(strategy: ProverStrategy) -> dict:
    return {"measurements": [operator_to_json(e) for e in strategy.scored_effects]}


def strategy_from_json(doc: dict, shared_state: HermitianOperator, what: str = "strategy") -> ProverStrategy:
    """Strategy from scored effects ``pi^1_i``; the complements ``I - pi^1_i`` are implied."""
    if not isinstance(doc, dict) or not isinstance(doc.get("measurements"), list):
        raise FormatError(f"{what}: expected an object with a 'measurements' list")
    effects = [operator_from_json(e, what=f"{what} measurement {k}") for k, e in enumerate(doc["measurements"])]
    return ProverStrategy(shared_state, tuple(Povm.two_outcome(e) for e in effects))


def read_operator(path: str | Path, allow_nonhermitian: bool = False) -> HermitianOperator:
    return operator_from_json(load_json(path), allow_nonhermitian, what=str(path))


def read_povm(path: str | Path) -> Povm:
    return povm_from_json(load_json(path), what=str(path))


def read_game(path: str | Path) -> SemiquantumGame:
    return game_from_json(load_json(path), what=str(path))


def write_operator(op: HermitianOperator, path: str | Path) -> None:
    dump_json(operator_to_json(op), path)
