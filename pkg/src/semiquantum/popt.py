"""POPT states: the W_p family, product-state minimisation and composition."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .operators import (
    PSD_TOL,
    DimensionMismatchError,
    HermitianOperator,
    InvalidArgumentError,
    PureState,
    expectation,
    partial_transpose,
    permute_state,
    permute_systems,
    phi_plus,
    tensor,
)
from .random import haar_vector, random_hermitian, substream

POPT_TOL = 1e-8
TRACE_TOL = 1e-10
SEESAW_RESTARTS = 32
SEESAW_ITERS = 200
SEESAW_CONVERGENCE = 1e-12


@dataclass(frozen=True)
class PoptState:
    op: HermitianOperator
    noise_parameter: float | None = None

    def __post_init__(self) -> None:
        if abs(self.op.trace() - 1.0) > TRACE_TOL:
            raise InvalidArgumentError(f"POPT state must have unit trace, got {self.op.trace()!r}")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.op.dims


class Verdict(str, enum.Enum):
    QUANTUM = "Quantum"
    BEYOND_QUANTUM_CANDIDATE = "BeyondQuantumCandidate"
    NOT_POPT = "NotPopt"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    min_eigenvalue: float
    product_min: float | None = None
    witness_vector: PureState | None = None

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "min_eigenvalue": self.min_eigenvalue,
            "product_min": self.product_min,
        }
        if self.witness_vector is not None:
            amp = self.witness_vector.amplitudes
            out["witness_vector"] = {
                "dims": list(self.witness_vector.dims),
                "re": amp.real.tolist(),
                "im": amp.imag.tolist(),
            }
        return out


class SeesawResult(NamedTuple):
    value: float
    direction: PureState


def make_wp(p: float) -> PoptState:
    """``p * PT[|phi+><phi+|] + (1 - p) I/4`` on two qubits."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    swap_half = partial_transpose(phi_plus(2).projector(), 1)
    op = HermitianOperator(p * swap_half.matrix + (1 - p) * np.eye(4) / 4, (2, 2))
    return PoptState(op, noise_parameter=p)


def isotropic_state(p: float) -> HermitianOperator:
    """``p |phi+><phi+| + (1 - p) I/4``; its partial transpose on B is W_p."""
    return HermitianOperator(p * phi_plus(2).projector().matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def _parse_partition(dims: tuple[int, ...], groups: Sequence[Sequence[int]] | None) -> list[list[int]]:
    n = len(dims)
    if groups is None:
        return [[k] for k in range(n)]
    groups = [[int(k) for k in g] for g in groups]
    flat = [k for g in groups for k in g]
    if len(groups) < 2 or any(not g for g in groups):
        raise InvalidArgumentError("a partition needs at least two nonempty groups")
    if sorted(flat) != list(range(n)):
        raise InvalidArgumentError(f"groups {groups} do not partition subsystems 0..{n - 1}")
    return groups


def _group_expectation(t: np.ndarray, vectors: list[np.ndarray]) -> float:
    v = vectors[0]
    for u in vectors[1:]:
        v = np.kron(v, u)
    side = v.shape[0]
    return float(np.vdot(v, t.reshape(side, side) @ v).real)


def product_min_seesaw(
    w: HermitianOperator | PoptState,
    bipartition: Sequence[Sequence[int]] | None = None,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    seed: int = 0,
) -> SeesawResult:
    """Minimise ``<v_1 ⊗ ... ⊗ v_k| w |v_1 ⊗ ... ⊗ v_k>`` by alternating eigenvector updates.

    ``bipartition`` lists groups of subsystem indices; the default puts every
    subsystem in its own group. Each restart starts from Haar-random vectors
    drawn from a substream of ``seed``; the best restart wins (first on ties).
    The returned direction is expressed in ``w``'s own subsystem order and
    reproduces the returned value exactly.
    """
    if isinstance(w, PoptState):
        w = w.op
    groups = _parse_partition(w.dims, bipartition)
    order = [k for g in groups for k in g]
    wp = permute_systems(w, order)
    gdims = [int(np.prod([w.dims[k] for k in g])) for g in groups]
    m = len(groups)
    t = wp.matrix.reshape(tuple(gdims) * 2)

    best_value = np.inf
    best_vectors: list[np.ndarray] | None = None
    for r in range(int(restarts)):
        rng = substream(seed, r)
        vectors = [haar_vector(d, rng) for d in gdims]
        value = _group_expectation(t, vectors)
        for _ in range(int(iters)):
            previous = value
            for g in range(m):
                eff = _effective_operator(t, vectors, g, m)
                vals, vecs = np.linalg.eigh(0.5 * (eff + eff.conj().T))
                vectors[g] = vecs[:, 0]
            value = _group_expectation(t, vectors)
            if value > previous + 1e-12:
                raise RuntimeError(f"seesaw value increased from {previous!r} to {value!r}")
            if previous - value < SEESAW_CONVERGENCE:
                break
        if value < best_value:
            best_value, best_vectors = value, [v.copy() for v in vectors]

    assert best_vectors is not None
    direction = PureState(_kron_all(best_vectors), tuple(w.dims[k] for k in order))
    direction = permute_state(direction, list(np.argsort(order)))
    value = direction.expectation(w)
    return SeesawResult(value, direction)


def _kron_all(vectors: list[np.ndarray]) -> np.ndarray:
    v = vectors[0]
    for u in vectors[1:]:
        v = np.kron(v, u)
    return v / np.linalg.norm(v)


def _effective_operator(t: np.ndarray, vectors: list[np.ndarray], keep: int, m: int) -> np.ndarray:
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = letters[:m]
    cols = letters[m : 2 * m]
    operands = [t]
    subscripts = [rows + cols]
    for g in range(m):
        if g == keep:
            continue
        operands += [vectors[g].conj(), vectors[g]]
        subscripts += [rows[g], cols[g]]
    spec = ",".join(subscripts) + "->" + rows[keep] + cols[keep]
    return np.einsum(spec, *operands)


def classify(
    w: PoptState | HermitianOperator,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    seed: int = 0,
    psd_tol: float = PSD_TOL,
    popt_tol: float = POPT_TOL,
    bipartition: Sequence[Sequence[int]] | None = None,
) -> Classification:
    """Quantum if PSD; otherwise try to refute POPT-ness with the seesaw.

    A seesaw that finds nothing below ``-popt_tol`` does not prove POPT-ness,
    hence the ``BeyondQuantumCandidate`` verdict.
    """
    op = w.op if isinstance(w, PoptState) else w
    if abs(op.trace() - 1.0) > TRACE_TOL:
        raise InvalidArgumentError(f"classify expects a unit-trace operator, got trace {op.trace()!r}")
    min_eig = op.min_eigenvalue()
    if min_eig >= -psd_tol:
        return Classification(Verdict.QUANTUM, min_eig)
    value, direction = product_min_seesaw(op, bipartition, restarts, iters, seed)
    verdict = Verdict.NOT_POPT if value < -popt_tol else Verdict.BEYOND_QUANTUM_CANDIDATE
    return Classification(verdict, min_eig, value, direction)


def random_popt_bqs(
    rng: np.random.Generator,
    dims: Sequence[int] = (2, 2),
    restarts: int = SEESAW_RESTARTS,
    margin: float = 0.1,
) -> PoptState:
    """Random unit-trace ``I/d + t H`` that is non-PSD yet survives the seesaw.

    ``H`` is a random traceless Hermitian operator. ``t`` is drawn uniformly
    from the inner ``1 - 2 margin`` fraction of the interval between the PSD
    boundary ``1/(d |lambda_min(H)|)`` and the seesaw product-positivity
    boundary ``1/(d |min_prod <H>|)``.
    """
    dims = tuple(dims)
    side = int(np.prod(dims))
    h = random_hermitian(dims, rng).matrix
    h = h - np.trace(h).real * np.eye(side) / side
    h_op = HermitianOperator(h, dims)
    lam = h_op.min_eigenvalue()
    prod = product_min_seesaw(h_op, restarts=restarts, seed=int(rng.integers(2**31))).value
    t_psd = 1.0 / (side * -lam)
    t_popt = np.inf if prod >= 0 else 1.0 / (side * -prod)
    hi = min(t_popt, 2 * t_psd)
    t = t_psd + (hi - t_psd) * rng.uniform(margin, 1 - margin)
    return PoptState(HermitianOperator(np.eye(side) / side + t * h, dims))


class ComposedState(NamedTuple):
    op: HermitianOperator
    pairing: dict[int, tuple[int, int]]


def tensor_with_pure_inputs(w: PoptState | HermitianOperator, inputs: Sequence[PureState]) -> ComposedState:
    """``psi_1 ⊗ ... ⊗ psi_n ⊗ W`` in the order (A_1^o..A_n^o, A_1..A_n).

    ``pairing[i] = (index of A_i^o, index of A_i)`` in the output.
    """
    op = w.op if isinstance(w, PoptState) else w
    n = op.n_parties
    if len(inputs) != n:
        raise DimensionMismatchError(f"need one input per party ({n}), got {len(inputs)}")
    pieces = [s.projector() for s in inputs]
    composed = tensor(*pieces, op)
    offset = sum(len(s.dims) for s in inputs)
    if offset != n:
        raise DimensionMismatchError("each input must live on a single subsystem")
    return ComposedState(composed, {i: (i, n + i) for i in range(n)})


def compose_with_ancilla(w: PoptState | HermitianOperator, ancilla: HermitianOperator) -> HermitianOperator:
    """``W ⊗ ancilla`` reordered as (A_1, A_1^o, A_2, A_2^o, ...)."""
    op = w.op if isinstance(w, PoptState) else w
    n = op.n_parties
    if ancilla.n_parties != n:
        raise DimensionMismatchError(f"ancilla has {ancilla.n_parties} subsystems, state has {n}")
    joint = tensor(op, ancilla)
    order = [k for i in range(n) for k in (i, n + i)]
    return permute_systems(joint, order)


def paired_max_entangled_effect(dims: Sequence[int]) -> HermitianOperator:
    """``⊗_i P+_{A_i A_i^o}`` in the (A_1, A_1^o, A_2, A_2^o, ...) order."""
    return tensor(*(phi_plus(d).projector() for d in dims))


def popt_violation_by_entangled_ancilla(w: PoptState | HermitianOperator, chi: HermitianOperator) -> float:
    """Probability of the all-``P+`` outcome on ``W ⊗ chi^T``.

    ``chi`` is the witness itself (an entangled density operator on
    A_1..A_n); the ancilla handed over is its transpose. A negative value
    shows ``W ⊗ chi^T`` is not POPT.
    """
    op = w.op if isinstance(w, PoptState) else w
    if chi.dims != op.dims:
        raise DimensionMismatchError(f"witness dims {chi.dims} do not match state dims {op.dims}")
    composed = compose_with_ancilla(op, chi.transpose())
    return expectation(composed, paired_max_entangled_effect(op.dims))


__all__ = [
    "POPT_TOL",
    "Classification",
    "ComposedState",
    "PoptState",
    "SeesawResult",
    "Verdict",
    "classify",
    "compose_with_ancilla",
    "isotropic_state",
    "make_wp",
    "paired_max_entangled_effect",
    "popt_violation_by_entangled_ancilla",
    "product_min_seesaw",
    "random_popt_bqs",
    "tensor_with_pure_inputs",
]
