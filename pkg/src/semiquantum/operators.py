"""Multipartite operator algebra.

Operators live on a tensor product of subsystems with dimensions ``dims``.
Party 0 is the most significant index of the computational basis, so
``tensor(a, b)`` equals ``np.kron(a, b)``. All subsystem indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
NORM_TOL = 1e-12
DEGENERACY_TOL = 1e-9


class InvalidArgumentError(ValueError):
    pass


class DimensionMismatchError(InvalidArgumentError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def _as_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidArgumentError(f"dims must be a nonempty list of positive integers, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix on ``prod(dims)``-dimensional space.

    Set ``check_hermitian=False`` to carry a non-Hermitian matrix through.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    check_hermitian: bool = True

    def __post_init__(self) -> None:
        matrix = _frozen(self.matrix)
        dims = _as_dims(self.dims)
        side = int(np.prod(dims))
        if matrix.shape != (side, side):
            raise DimensionMismatchError(
                f"matrix shape {matrix.shape} does not match dims {dims} (side {side})"
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)
        if self.check_hermitian and hermiticity_error(matrix) > HERMITIAN_TOL:
            raise InvalidArgumentError(
                f"operator is not Hermitian (|A - A^dag|_F = {hermiticity_error(matrix):.3e})"
            )

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def min_eigenvalue(self) -> float:
        return float(self.eigvalsh()[0])

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def transpose(self) -> "HermitianOperator":
        return HermitianOperator(self.matrix.T, self.dims, self.check_hermitian)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dims(self, other)
        return HermitianOperator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dims(self, other)
        return HermitianOperator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        if np.iscomplexobj(scalar) and abs(np.imag(scalar)) > 0:
            raise InvalidArgumentError("scaling by a complex number breaks Hermiticity")
        return HermitianOperator(self.matrix * float(np.real(scalar)), self.dims)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"HermitianOperator(dims={list(self.dims)}, trace={self.trace():.6g})"


def _require_same_dims(a: HermitianOperator, b: HermitianOperator) -> None:
    if a.dims != b.dims:
        raise DimensionMismatchError(f"dims differ: {a.dims} vs {b.dims}")


def hermiticity_error(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix - matrix.conj().T))


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        amplitudes = _frozen(np.ravel(self.amplitudes))
        dims = _as_dims(self.dims)
        if amplitudes.shape[0] != int(np.prod(dims)):
            raise DimensionMismatchError(
                f"vector of length {amplitudes.shape[0]} does not match dims {dims}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state is not normalised (norm {norm!r})")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, vector: Sequence[complex], dims: Sequence[int] | None = None) -> "PureState":
        """Normalise ``vector`` and wrap it (single subsystem by default)."""
        vector = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise InvalidArgumentError("cannot normalise the zero vector")
        return cls(vector / norm, dims if dims is not None else (vector.shape[0],))

    def projector(self) -> HermitianOperator:
        v = self.amplitudes
        return HermitianOperator(np.outer(v, v.conj()), self.dims)

    def conj(self) -> "PureState":
        return PureState(self.amplitudes.conj(), self.dims)

    def expectation(self, op: HermitianOperator) -> float:
        if op.dims != self.dims:
            raise DimensionMismatchError(f"dims differ: {op.dims} vs {self.dims}")
        v = self.amplitudes
        return float(np.vdot(v, op.matrix @ v).real)


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered list of effects that are PSD and sum to the identity."""

    effects: tuple[HermitianOperator, ...]
    tol: float = PSD_TOL

    def __post_init__(self) -> None:
        effects = tuple(self.effects)
        if not effects:
            raise InvalidArgumentError("a POVM needs at least one effect")
        dims = effects[0].dims
        for k, effect in enumerate(effects):
            if effect.dims != dims:
                raise DimensionMismatchError(f"effect {k} has dims {effect.dims}, expected {dims}")
            if effect.min_eigenvalue() < -self.tol:
                raise InvalidArgumentError(
                    f"effect {k} is not PSD (min eigenvalue {effect.min_eigenvalue():.3e})"
                )
        total = sum(e.matrix for e in effects)
        err = np.linalg.norm(total - np.eye(total.shape[0]))
        if err > self.tol:
            raise InvalidArgumentError(f"effects do not sum to identity (error {err:.3e})")
        object.__setattr__(self, "effects", effects)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.effects[0].dims

    def __len__(self) -> int:
        return len(self.effects)

    def __getitem__(self, k: int) -> HermitianOperator:
        return self.effects[k]

    def __iter__(self):
        return iter(self.effects)

    def is_projective(self, tol: float = 1e-9) -> bool:
        return all(np.linalg.norm(e.matrix @ e.matrix - e.matrix) <= tol for e in self.effects)

    @classmethod
    def two_outcome(cls, effect: HermitianOperator) -> "Povm":
        """``{effect, I - effect}``; the first element is the scored outcome."""
        complement = HermitianOperator(np.eye(effect.side) - effect.matrix, effect.dims)
        return cls((effect, complement))


def identity(dims: Sequence[int]) -> HermitianOperator:
    dims = _as_dims(dims)
    return HermitianOperator(np.eye(int(np.prod(dims))), dims)


def maximally_mixed(dims: Sequence[int]) -> HermitianOperator:
    dims = _as_dims(dims)
    side = int(np.prod(dims))
    return HermitianOperator(np.eye(side) / side, dims)


def tensor(*ops: HermitianOperator) -> HermitianOperator:
    if not ops:
        raise InvalidArgumentError("tensor needs at least one operator")
    matrix = reduce(np.kron, (op.matrix for op in ops))
    dims = sum((op.dims for op in ops), ())
    return HermitianOperator(matrix, dims, all(op.check_hermitian for op in ops))


def tensor_states(*states: PureState) -> PureState:
    vec = reduce(np.kron, (s.amplitudes for s in states))
    return PureState(vec, sum((s.dims for s in states), ()))


def _check_index(index: int, n: int) -> int:
    index = int(index)
    if not 0 <= index < n:
        raise InvalidArgumentError(f"subsystem index {index} out of range for {n} subsystems")
    return index


def permute_systems(a: HermitianOperator, order: Sequence[int]) -> HermitianOperator:
    """Reorder tensor factors: output factor ``k`` is input factor ``order[k]``."""
    n = a.n_parties
    order = [_check_index(k, n) for k in order]
    if sorted(order) != list(range(n)):
        raise InvalidArgumentError(f"{order} is not a permutation of {n} subsystems")
    t = a.matrix.reshape(a.dims + a.dims)
    t = t.transpose(order + [n + k for k in order])
    dims = tuple(a.dims[k] for k in order)
    side = a.side
    return HermitianOperator(t.reshape(side, side), dims, a.check_hermitian)


def permute_state(state: PureState, order: Sequence[int]) -> PureState:
    t = state.amplitudes.reshape(state.dims).transpose(list(order))
    return PureState(t.ravel(), tuple(state.dims[k] for k in order))


def partial_trace(a: HermitianOperator, keep: Iterable[int]) -> HermitianOperator:
    """Trace out every subsystem not listed in ``keep``.

    Keeping every subsystem returns ``a`` unchanged. Use :func:`trace_all`
    for the scalar full trace. The kept factors stay in their original order.
    """
    n = a.n_parties
    keep = sorted({_check_index(k, n) for k in keep})
    if not keep:
        raise InvalidArgumentError("keep must name at least one subsystem; use trace_all for a scalar")
    t = a.matrix.reshape(a.dims + a.dims)
    # einsum with paired labels for traced factors
    letters = [chr(ord("a") + k) for k in range(2 * n)]
    row = letters[:n]
    col = [letters[n + k] if k in keep else letters[k] for k in range(n)]
    out = [row[k] for k in keep] + [col[k] for k in keep]
    reduced = np.einsum("".join(row + col) + "->" + "".join(out), t)
    dims = tuple(a.dims[k] for k in keep)
    side = int(np.prod(dims))
    return HermitianOperator(reduced.reshape(side, side), dims, a.check_hermitian)


def trace_all(a: HermitianOperator) -> float:
    return a.trace()


def partial_transpose(a: HermitianOperator, party: int) -> HermitianOperator:
    n = a.n_parties
    party = _check_index(party, n)
    t = a.matrix.reshape(a.dims + a.dims)
    axes = list(range(2 * n))
    axes[party], axes[n + party] = axes[n + party], axes[party]
    return HermitianOperator(t.transpose(axes).reshape(a.side, a.side), a.dims, a.check_hermitian)


def hermitian_eig(a: HermitianOperator) -> tuple[np.ndarray, list[PureState]]:
    """Ascending eigenvalues and orthonormal eigenvectors.

    Eigenvalues closer than ``DEGENERACY_TOL`` form a degenerate block; the
    basis chosen inside such a block is arbitrary (see
    :func:`degenerate_blocks` and :func:`canonical_block_vector`).
    """
    err = hermiticity_error(a.matrix)
    if err > HERMITIAN_TOL:
        raise InvalidArgumentError(f"operator is not Hermitian (|A - A^dag|_F = {err:.3e})")
    # symmetrise so the LAPACK routine sees an exactly Hermitian matrix
    values, vectors = np.linalg.eigh(0.5 * (a.matrix + a.matrix.conj().T))
    states = [PureState(vectors[:, k] / np.linalg.norm(vectors[:, k]), a.dims) for k in range(values.shape[0])]
    return values, states


def degenerate_blocks(values: np.ndarray, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    blocks: list[list[int]] = [[0]]
    for k in range(1, len(values)):
        if values[k] - values[blocks[-1][-1]] <= tol:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return blocks


def canonical_block_vector(vectors: np.ndarray) -> np.ndarray:
    """A basis-independent unit vector from the span of ``vectors`` (columns).

    Projects the computational basis vector with the largest overlap onto the
    span; ties go to the lowest index. The result has a real positive entry
    at that index, so it does not depend on how the solver rotated the block.
    """
    q, _ = np.linalg.qr(vectors)
    proj = q @ q.conj().T
    norms = np.linalg.norm(proj, axis=0)
    k = int(np.flatnonzero(norms >= norms.max() - 1e-9)[0])
    v = proj[:, k]
    return v / np.linalg.norm(v)


def born_probability(
    state: HermitianOperator,
    effects: Sequence[HermitianOperator],
    parties: Sequence[Sequence[int]] | Sequence[int] | None = None,
) -> float:
    """``Tr[state (effect_1 ⊗ ... ⊗ effect_k)]``.

    ``parties`` assigns each effect to a subsystem (or a group of consecutive
    subsystems given as a list); unassigned subsystems get the identity.
    By default effect ``k`` acts on subsystem ``k`` and the effects must
    cover every subsystem.
    """
    n = state.n_parties
    if parties is None:
        if sum(len(e.dims) for e in effects) != n:
            raise DimensionMismatchError(
                f"{len(effects)} effects cover {sum(len(e.dims) for e in effects)} subsystems, state has {n}"
            )
        order = list(range(n))
        full = tensor(*effects)
    else:
        groups = [[g] if np.isscalar(g) else list(g) for g in parties]
        if len(groups) != len(effects):
            raise InvalidArgumentError("parties must list one entry per effect")
        used = [_check_index(k, n) for g in groups for k in g]
        if len(set(used)) != len(used):
            raise InvalidArgumentError("a subsystem is assigned more than one effect")
        rest = [k for k in range(n) if k not in used]
        pieces = list(effects) + [identity([state.dims[k]]) for k in rest]
        order = used + rest
        full = tensor(*pieces)
    if tuple(state.dims[k] for k in order) != full.dims:
        raise DimensionMismatchError(
            f"effect dims {full.dims} do not match state dims {tuple(state.dims[k] for k in order)}"
        )
    inverse = list(np.argsort(order))
    full = permute_systems(full, inverse)
    value = np.trace(state.matrix @ full.matrix)
    if abs(value.imag) > 1e-10:
        raise InvalidArgumentError(f"Born probability has imaginary part {value.imag:.3e}")
    return float(value.real)


def expectation(state: HermitianOperator, effect: HermitianOperator) -> float:
    _require_same_dims(state, effect)
    value = np.trace(state.matrix @ effect.matrix)
    if abs(value.imag) > 1e-10:
        raise InvalidArgumentError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def phi_plus(d: int) -> PureState:
    """``sum_i |ii> / sqrt(d)``."""
    return PureState(np.eye(d, dtype=complex).ravel() / np.sqrt(d), (d, d))


def bloch_projector(n: Sequence[float]) -> HermitianOperator:
    """``(I + n.sigma) / 2`` for a unit Bloch vector ``n``."""
    n = np.asarray(n, dtype=float)
    return HermitianOperator(0.5 * (np.eye(2) + np.einsum("k,kij->ij", n, PAULI[1:])), (2,))


PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
