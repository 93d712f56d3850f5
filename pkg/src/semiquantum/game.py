"""Semiquantum games: synthesis from a beyond-quantum state, payoff evaluation
and quantum-strategy checks.

A game hands party ``i`` one of the pure states ``inputs[i][s]`` and pays
``beta[s_1, ..., s_n]`` when every party answers with outcome 1 (the first
effect of its two-outcome measurement); other outcomes pay nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import SPARSE_DROP_TOL, decompose_witness, pauli_eigenstates, psi_minus_six_state_decomposition
from .operators import (
    PSD_TOL,
    DimensionMismatchError,
    HermitianOperator,
    InvalidArgumentError,
    Povm,
    PureState,
    canonical_block_vector,
    degenerate_blocks,
    expectation,
    hermitian_eig,
    permute_systems,
    phi_plus,
    tensor,
)
from .popt import PoptState, isotropic_state, make_wp, tensor_with_pure_inputs
from .random import haar_state, random_density, random_two_outcome_povm, substream

REPORT_TOL = 1e-9
CONSISTENCY_TOL = 1e-8


class NoNegativeEigenvalueError(InvalidArgumentError):
    pass


class ConsistencyError(RuntimeError):
    pass


class Method(str, enum.Enum):
    EXACT_BORN = "exact_born"
    ANALYTIC_SHORTCUT = "analytic_shortcut"


class GameVerdict(str, enum.Enum):
    CERTIFIED = "BeyondQuantumCertified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class SemiquantumGame:
    inputs: tuple[tuple[PureState, ...], ...]
    beta: np.ndarray
    witness: HermitianOperator | None = None

    def __post_init__(self) -> None:
        inputs = tuple(tuple(states) for states in self.inputs)
        beta = np.array(self.beta, copy=True)
        if np.iscomplexobj(beta):
            if np.max(np.abs(beta.imag), initial=0.0) > 1e-10:
                raise InvalidArgumentError("payoff weights must be real")
            beta = beta.real
        beta = beta.astype(float)
        if beta.shape != tuple(len(s) for s in inputs):
            raise DimensionMismatchError(f"beta shape {beta.shape} does not match input counts")
        if not np.any(beta):
            raise InvalidArgumentError("payoff weights are identically zero")
        for i, states in enumerate(inputs):
            for state in states:
                if len(state.dims) != 1:
                    raise DimensionMismatchError(f"inputs for party {i} must live on one subsystem")
            if len({s.dims for s in states}) != 1:
                raise DimensionMismatchError(f"inputs for party {i} have mixed dimensions")
        if self.witness is not None and self.witness.dims != self.dims_from(inputs):
            raise DimensionMismatchError("witness dims do not match input dims")
        beta.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "beta", beta)

    @staticmethod
    def dims_from(inputs) -> tuple[int, ...]:
        return tuple(states[0].dims[0] for states in inputs)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.dims_from(self.inputs)

    @property
    def parties(self) -> int:
        return len(self.inputs)

    @property
    def scored_outcome(self) -> tuple[int, ...]:
        return (1,) * self.parties

    def nonzero(self, tol: float = SPARSE_DROP_TOL) -> list[tuple[tuple[int, ...], float]]:
        """``(index tuple, weight)`` pairs in lexicographic order."""
        return [(idx, float(self.beta[idx])) for idx in np.ndindex(self.beta.shape) if abs(self.beta[idx]) >= tol]

    def input_distribution(self) -> dict[tuple[int, ...], float]:
        """Uniform over the index tuples that carry a nonzero weight."""
        support = [idx for idx, _ in self.nonzero()]
        return {idx: 1.0 / len(support) for idx in support}


@dataclass(frozen=True, eq=False)
class ProverStrategy:
    """Shared state plus one two-outcome measurement per party on (A_i, A_i^o)."""

    shared_state: HermitianOperator
    measurements: tuple[Povm, ...]

    def __post_init__(self) -> None:
        measurements = tuple(self.measurements)
        if len(measurements) != self.shared_state.n_parties:
            raise DimensionMismatchError("need one measurement per party of the shared state")
        for i, m in enumerate(measurements):
            d = self.shared_state.dims[i]
            if len(m) != 2:
                raise InvalidArgumentError(f"measurement {i} must have two outcomes")
            if int(np.prod(m.dims)) != d * d:
                raise DimensionMismatchError(f"measurement {i} must act on a {d}x{d} system pair")
        object.__setattr__(self, "measurements", measurements)

    @property
    def scored_effects(self) -> tuple[HermitianOperator, ...]:
        dims = self.shared_state.dims
        return tuple(HermitianOperator(m[0].matrix, (d, d)) for m, d in zip(self.measurements, dims))


@dataclass(frozen=True)
class GameReport:
    payoff: float
    method: Method
    verdict: GameVerdict
    witness: HermitianOperator | None = field(default=None, compare=False)

    @property
    def negativity(self) -> float:
        return -min(0.0, self.payoff)

    def to_dict(self, seed: int | None = None) -> dict:
        return {
            "payoff": self.payoff,
            "method": self.method.value,
            "verdict": self.verdict.value,
            "negativity": self.negativity,
            "seed": seed,
        }


def _report(payoff: float, method: Method, witness: HermitianOperator | None, tol: float) -> GameReport:
    verdict = GameVerdict.CERTIFIED if payoff < -tol else GameVerdict.INCONCLUSIVE
    return GameReport(payoff, method, verdict, witness)


def negative_eigenprojector(w: HermitianOperator, psd_tol: float = PSD_TOL) -> tuple[float, HermitianOperator]:
    """Rank-one projector onto the most negative eigenvector of ``w``.

    Inside a degenerate lowest block the vector is picked by
    :func:`canonical_block_vector`, so the result does not depend on the
    eigensolver's rotation of the block.
    """
    values, states = hermitian_eig(w)
    if values[0] >= -psd_tol:
        raise NoNegativeEigenvalueError(f"operator has no eigenvalue below -{psd_tol} (min {values[0]:.3e})")
    block = degenerate_blocks(values)[0]
    vecs = np.column_stack([states[k].amplitudes for k in block])
    v = canonical_block_vector(vecs) if len(block) > 1 else vecs[:, 0]
    chi = HermitianOperator(np.outer(v, v.conj()), w.dims)
    return float(values[0]), chi


def game_from_witness(chi: HermitianOperator) -> SemiquantumGame:
    decomposition = decompose_witness(chi)
    if decomposition.reconstruction_error > CONSISTENCY_TOL:
        raise ConsistencyError(
            f"witness decomposition reconstruction error {decomposition.reconstruction_error:.3e}"
        )
    return SemiquantumGame(decomposition.input_states, decomposition.beta, witness=chi)


def synthesize_game(
    w: PoptState | HermitianOperator, eig_pick: str = "most_negative", psd_tol: float = PSD_TOL
) -> tuple[SemiquantumGame, HermitianOperator]:
    """Game whose canonical-strategy payoff on ``w`` is ``Tr[chi w] / prod(d)`` < 0."""
    if eig_pick != "most_negative":
        raise InvalidArgumentError(f"unknown eigenvalue policy {eig_pick!r}")
    op = w.op if isinstance(w, PoptState) else w
    _, chi = negative_eigenprojector(op, psd_tol)
    return game_from_witness(chi), chi


def canonical_prover_strategy(w: PoptState | HermitianOperator) -> ProverStrategy:
    """Each party measures ``{P+, I - P+}`` on its share and its input register."""
    op = w.op if isinstance(w, PoptState) else w
    measurements = tuple(Povm.two_outcome(phi_plus(d).projector()) for d in op.dims)
    return ProverStrategy(op, measurements)


def _scored_effect_in_composed_order(strategy: ProverStrategy) -> HermitianOperator:
    """``⊗_i pi^1_{A_i A_i^o}`` reordered to (A_1^o..A_n^o, A_1..A_n)."""
    n = strategy.shared_state.n_parties
    effect = tensor(*strategy.scored_effects)  # (A_1, A_1^o, A_2, A_2^o, ...)
    order = [2 * i + 1 for i in range(n)] + [2 * i for i in range(n)]
    return permute_systems(effect, order)


def _check_compatible(game: SemiquantumGame, strategy: ProverStrategy) -> None:
    if game.dims != strategy.shared_state.dims:
        raise DimensionMismatchError(
            f"game input dims {game.dims} do not match shared state dims {strategy.shared_state.dims}"
        )


def evaluate_payoff(game: SemiquantumGame, strategy: ProverStrategy, tol: float = REPORT_TOL) -> GameReport:
    """Exact Born-rule payoff ``sum_s beta[s] p(1..1 | psi^{s_1}..psi^{s_n})``."""
    _check_compatible(game, strategy)
    effect = _scored_effect_in_composed_order(strategy)
    total = 0.0
    for idx, weight in game.nonzero():
        inputs = [game.inputs[i][s] for i, s in enumerate(idx)]
        composed = tensor_with_pure_inputs(strategy.shared_state, inputs).op
        total += weight * expectation(composed, effect)
    return _report(total, Method.EXACT_BORN, game.witness, tol)


def analytic_payoff(game: SemiquantumGame, w: PoptState | HermitianOperator) -> float:
    """``Tr[chi w] / prod(d_i)`` for the game's recorded witness."""
    if game.witness is None:
        raise InvalidArgumentError("game carries no witness")
    op = w.op if isinstance(w, PoptState) else w
    if op.dims != game.dims:
        raise DimensionMismatchError(f"state dims {op.dims} do not match game dims {game.dims}")
    return expectation(op, game.witness) / float(np.prod(game.dims))


def analytic_report(game: SemiquantumGame, w: PoptState | HermitianOperator, tol: float = REPORT_TOL) -> GameReport:
    return _report(analytic_payoff(game, w), Method.ANALYTIC_SHORTCUT, game.witness, tol)


def input_response_operator(strategy: ProverStrategy) -> HermitianOperator:
    """``R = Tr_{A_1..A_n}[(⊗ pi^1)(rho ⊗ I_{A^o})]`` on (A_1^o..A_n^o)."""
    n = strategy.shared_state.n_parties
    effect = _scored_effect_in_composed_order(strategy)
    dims_o = strategy.shared_state.dims
    side_o = int(np.prod(dims_o))
    joint = HermitianOperator(np.kron(np.eye(side_o), strategy.shared_state.matrix), dims_o + dims_o)
    product = effect.matrix @ joint.matrix
    # the product is not Hermitian; trace out A with the raw matrix
    t = product.reshape((dims_o + dims_o) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[: 2 * n])
    cols = list(letters[2 * n : 4 * n])
    for k in range(n, 2 * n):
        cols[k] = rows[k]
    out = "".join(rows[:n] + cols[:n])
    r = np.einsum("".join(rows + cols) + "->" + out, t).reshape(side_o, side_o)
    return HermitianOperator(0.5 * (r + r.conj().T), dims_o)


def random_quantum_strategy(dims: Sequence[int], rng: np.random.Generator, pure: bool) -> ProverStrategy:
    rho = haar_state(dims, rng).projector() if pure else random_density(dims, rng)
    measurements = tuple(random_two_outcome_povm((d, d), rng, projective=bool(rng.integers(2))) for d in dims)
    return ProverStrategy(rho, measurements)


def quantum_positivity_check(
    game: SemiquantumGame, trials: int = 1000, seed: int = 0, psd_tol: float = PSD_TOL
) -> float:
    """Minimum exact payoff over random quantum strategies.

    Alternates Haar-pure and Hilbert-Schmidt mixed shared states; trial ``k``
    draws from substream ``(seed, k)``. For every trial the operator ``R`` on
    the input registers must be PSD and ``Tr[R chi^T]`` must equal the exact
    payoff; either failure raises :class:`ConsistencyError`.
    """
    if game.witness is not None and game.witness.transpose().min_eigenvalue() < -psd_tol:
        raise InvalidArgumentError("witness transpose is not PSD")
    lowest = np.inf
    for k in range(int(trials)):
        rng = substream(seed, k)
        strategy = random_quantum_strategy(game.dims, rng, pure=(k % 2 == 0))
        payoff = evaluate_payoff(game, strategy).payoff
        r = input_response_operator(strategy)
        r_min = r.min_eigenvalue()
        if r_min < -psd_tol:
            raise ConsistencyError(f"trial {k}: input response operator has eigenvalue {r_min:.3e}")
        if game.witness is not None:
            via_r = expectation(r, game.witness.transpose())
            if abs(via_r - payoff) > CONSISTENCY_TOL:
                raise ConsistencyError(f"trial {k}: Tr[R chi^T] = {via_r!r} but exact payoff = {payoff!r}")
        lowest = min(lowest, payoff)
    return float(lowest)


WP_INPUT_LABELS = ("x", "y", "z", "xb", "yb", "zb")


def wp_game() -> SemiquantumGame:
    """Six Pauli-eigenstate inputs per party; certifies W_p for p > 1/3.

    Weights follow the six-state decomposition of |psi-><psi-|, which is also
    recorded as the game's witness.
    """
    states = pauli_eigenstates()
    inputs = tuple(states[label] for label in WP_INPUT_LABELS)
    table = psi_minus_six_state_decomposition()
    beta = np.array([[table[(s, t)] for t in WP_INPUT_LABELS] for s in WP_INPUT_LABELS])
    psi_minus = PureState(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))
    return SemiquantumGame((inputs, inputs), beta, witness=psi_minus.projector())


def effective_povm(povm: Povm, state: PureState) -> Povm:
    """``Q^a = Tr_{A^o}[pi^a (I_A ⊗ psi)]`` for ``povm`` on (A, A^o)."""
    d_o = state.dims[0]
    side = povm[0].side
    if len(state.dims) != 1 or side % d_o:
        raise DimensionMismatchError(f"input of dimension {d_o} does not fit a POVM of side {side}")
    d = side // d_o
    lifted = np.kron(np.eye(d), state.projector().matrix)
    effects = []
    for effect in povm:
        product = effect.matrix @ lifted
        q = np.einsum("ajbj->ab", product.reshape(d, d_o, d, d_o))
        effects.append(HermitianOperator(0.5 * (q + q.conj().T), (d,)))
    out = Povm(tuple(effects))
    total = sum(e.matrix for e in out)
    if np.linalg.norm(total - np.eye(d)) > 1e-12 * max(1, d):
        raise ConsistencyError("effective POVM is not complete")
    return out


def _require_orthogonal(states: Sequence[PureState], tol: float = 1e-12) -> None:
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            if abs(np.vdot(states[i].amplitudes, states[j].amplitudes)) > tol:
                raise InvalidArgumentError(f"inputs {i} and {j} are not orthogonal")


def orthogonal_input_simulation_wp(
    p: float,
    povms: Sequence[Povm],
    inputs: Sequence[Sequence[PureState]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Correlations of W_p under orthogonal inputs, and their quantum simulation.

    ``povms[i]`` is party ``i``'s measurement on (A_i, A_i^o). Returns two
    arrays indexed ``[s, t, a, b]``: the W_p correlations
    ``Tr[(Q^a[s] ⊗ Q^b[t]) W_p]`` and the isotropic-state simulation
    ``Tr[(Q^a[s] ⊗ Q^b[t]^T) rho_p]`` in which the parties first read off the
    (orthogonal, hence distinguishable) input index.
    """
    if len(povms) != 2:
        raise InvalidArgumentError("W_p has two parties")
    if inputs is None:
        basis = (PureState(np.array([1, 0]), (2,)), PureState(np.array([0, 1]), (2,)))
        inputs = (basis, basis)
    for states in inputs:
        _require_orthogonal(states)
    w = make_wp(p).op
    rho = isotropic_state(p)
    q_a = [effective_povm(povms[0], s) for s in inputs[0]]
    q_b = [effective_povm(povms[1], t) for t in inputs[1]]
    shape = (len(q_a), len(q_b), len(povms[0]), len(povms[1]))
    table_w = np.zeros(shape)
    table_q = np.zeros(shape)
    for s, qa in enumerate(q_a):
        for t, qb in enumerate(q_b):
            for a, ea in enumerate(qa):
                for b, eb in enumerate(qb):
                    table_w[s, t, a, b] = expectation(w, tensor(ea, eb))
                    table_q[s, t, a, b] = expectation(rho, tensor(ea, eb.transpose()))
    return table_w, table_q


__all__ = [
    "ConsistencyError",
    "GameReport",
    "GameVerdict",
    "Method",
    "NoNegativeEigenvalueError",
    "ProverStrategy",
    "SemiquantumGame",
    "analytic_payoff",
    "analytic_report",
    "canonical_prover_strategy",
    "effective_povm",
    "evaluate_payoff",
    "game_from_witness",
    "input_response_operator",
    "negative_eigenprojector",
    "orthogonal_input_simulation_wp",
    "quantum_positivity_check",
    "random_quantum_strategy",
    "synthesize_game",
    "wp_game",
]
