"""Non-orthogonal rank-one projector bases and witness decomposition.

For dimension ``d`` the basis holds ``d**2`` projectors in a fixed order:
the diagonal projectors ``|a><a|`` first, then ``P1(a, b)`` and ``P2(a, b)``
for every ``a < b`` in lexicographic order, ``P1`` before ``P2``::

    P1(a, b) = (|a><a| + |b><b| + |a><b| + |b><a|) / 2
    P2(a, b) = (|a><a| + |b><b| + i|a><b| - i|b><a|) / 2
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .operators import (
    HERMITIAN_TOL,
    HermitianOperator,
    InvalidArgumentError,
    PureState,
    hermiticity_error,
    ket,
)

RECONSTRUCTION_TOL = 1e-9
BETA_IMAG_TOL = 1e-10
SPARSE_DROP_TOL = 1e-12


@dataclass(frozen=True)
class ProjectorBasis:
    d: int
    labels: tuple[tuple[str, int, int], ...]
    vectors: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def elements(self) -> tuple[HermitianOperator, ...]:
        return tuple(HermitianOperator(np.outer(v, v.conj()), (self.d,)) for v in self.vectors)

    def matrices(self) -> np.ndarray:
        """Stacked ``(d**2, d, d)`` array of the projectors."""
        return np.array([np.outer(v, v.conj()) for v in self.vectors])

    def index(self, kind: str, a: int, b: int | None = None) -> int:
        key = (kind, a, a if b is None else b)
        return self.labels.index(key)

    def __len__(self) -> int:
        return len(self.vectors)


@lru_cache(maxsize=None)
def proj_basis(d: int) -> ProjectorBasis:
    d = int(d)
    if d < 2:
        raise InvalidArgumentError(f"projector basis needs d >= 2, got {d}")
    labels: list[tuple[str, int, int]] = []
    vectors: list[np.ndarray] = []
    for a in range(d):
        labels.append(("diag", a, a))
        vectors.append(ket(a, d))
    for a, b in itertools.combinations(range(d), 2):
        labels.append(("P1", a, b))
        vectors.append((ket(a, d) + ket(b, d)) / np.sqrt(2))
        labels.append(("P2", a, b))
        # P2 = |v><v| with v = (|a> - i|b>)/sqrt(2)
        vectors.append((ket(a, d) - 1j * ket(b, d)) / np.sqrt(2))
    for v in vectors:
        v.setflags(write=False)
    return ProjectorBasis(d, tuple(labels), tuple(vectors))


def comp_to_proj(a: int, b: int, d: int) -> np.ndarray:
    """Coefficients of ``|a><b|`` over ``proj_basis(d)``."""
    if not (0 <= a < d and 0 <= b < d):
        raise InvalidArgumentError(f"indices ({a}, {b}) out of range for d={d}")
    basis = proj_basis(d)
    coeffs = np.zeros(len(basis), dtype=complex)
    if a == b:
        coeffs[basis.index("diag", a)] = 1.0
        return coeffs
    lo, hi = min(a, b), max(a, b)
    if a < b:
        coeffs[basis.index("P1", lo, hi)] = 1.0
        coeffs[basis.index("P2", lo, hi)] = -1j
        diag = -(1 - 1j) / 2
    else:
        coeffs[basis.index("P1", lo, hi)] = 1.0
        coeffs[basis.index("P2", lo, hi)] = 1j
        diag = -(1 + 1j) / 2
    coeffs[basis.index("diag", a)] += diag
    coeffs[basis.index("diag", b)] += diag
    return coeffs


@lru_cache(maxsize=None)
def _change_of_basis(d: int) -> np.ndarray:
    """``(d**2, d, d)``: entry ``[s, a, b]`` is the coefficient of |a><b| on element ``s``."""
    table = np.zeros((d * d, d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            table[:, a, b] = comp_to_proj(a, b, d)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class WitnessDecomposition:
    """``chi = sum_s beta[s] ⊗_i (psi_i^{s_i})^T``.

    ``input_states[i][s]`` is the state handed to party ``i`` for index ``s``:
    the complex conjugate of the ``s``-th basis vector, so its projector is
    the transposed basis projector.
    """

    dims: tuple[int, ...]
    beta: np.ndarray
    input_states: tuple[tuple[PureState, ...], ...]
    reconstruction_error: float

    @property
    def parties(self) -> int:
        return len(self.dims)

    @property
    def basis_indices(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(range(d * d)) for d in self.dims)

    def nonzero(self, tol: float = SPARSE_DROP_TOL) -> list[tuple[tuple[int, ...], float]]:
        return [(idx, float(self.beta[idx])) for idx in np.ndindex(self.beta.shape) if abs(self.beta[idx]) >= tol]

    def reassemble(self) -> np.ndarray:
        return reassemble(self.beta, [[s.projector().matrix.T for s in states] for states in self.input_states])

    def to_dict(self) -> dict:
        d = self.dims[0] if len(set(self.dims)) == 1 else "mixed"
        return {
            "parties": self.parties,
            "basis": f"proj-canonical-{d}",
            "dims": list(self.dims),
            "beta": [{"s": list(idx), "value": value} for idx, value in self.nonzero()],
            "reconstruction_error": self.reconstruction_error,
        }


def reassemble(beta: np.ndarray, factors: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    """``sum_s beta[s] ⊗_i factors[i][s_i]`` (dense)."""
    out = None
    for idx in np.ndindex(beta.shape):
        coeff = beta[idx]
        if coeff == 0:
            continue
        term = coeff * reduce(np.kron, (factors[i][s] for i, s in enumerate(idx)))
        out = term if out is None else out + term
    if out is None:
        side = int(np.prod([f[0].shape[0] for f in factors]))
        out = np.zeros((side, side), dtype=complex)
    return out


def _beta_by_substitution(chi: HermitianOperator) -> np.ndarray:
    """Expand over ⊗ computational bases, then substitute per factor."""
    dims = chi.dims
    n = len(dims)
    t = chi.matrix.reshape(dims + dims)
    # alpha[a_1..a_n, b_1..b_n] -> interleave to (a_1, b_1, ..., a_n, b_n)
    t = t.transpose([k for i in range(n) for k in (i, n + i)])
    letters = "abcdefghijklmnopqrstuvwxyz"
    operands = [t]
    subs = ["".join(letters[2 * i] + letters[2 * i + 1] for i in range(n))]
    out = ""
    for i in range(n):
        s = letters.upper()[i]
        operands.append(_change_of_basis(dims[i]))
        subs.append(s + letters[2 * i] + letters[2 * i + 1])
        out += s
    return np.einsum(",".join(subs) + "->" + out, *operands)


def _beta_by_solve(chi: HermitianOperator) -> np.ndarray:
    """Solve the linear system over vectorised product projectors."""
    dims = chi.dims
    shape = tuple(d * d for d in dims)
    mats = [proj_basis(d).matrices() for d in dims]
    columns = np.empty((int(np.prod(shape)), chi.side * chi.side), dtype=complex)
    for row, idx in enumerate(np.ndindex(shape)):
        columns[row] = reduce(np.kron, (mats[i][s] for i, s in enumerate(idx))).ravel()
    beta = np.linalg.solve(columns.T, chi.matrix.ravel())
    return beta.reshape(shape)


def decompose_witness(chi: HermitianOperator, cross_check_tol: float = RECONSTRUCTION_TOL) -> WitnessDecomposition:
    """Real ``beta`` with ``chi = sum beta ⊗ phi^{s_i}`` over product projector bases.

    Both the substitution route and a direct linear solve are computed and
    must agree within ``cross_check_tol``.
    """
    err = hermiticity_error(chi.matrix)
    if err > HERMITIAN_TOL:
        raise InvalidArgumentError(f"witness is not Hermitian (|A - A^dag|_F = {err:.3e})")
    if any(d < 2 for d in chi.dims):
        raise InvalidArgumentError("every subsystem needs dimension >= 2")
    beta_sub = _beta_by_substitution(chi)
    beta_lin = _beta_by_solve(chi)
    gap = float(np.max(np.abs(beta_sub - beta_lin)))
    if gap > cross_check_tol:
        raise ArithmeticError(f"decomposition routes disagree by {gap:.3e}")
    imag = float(np.max(np.abs(beta_sub.imag)))
    if imag > BETA_IMAG_TOL:
        raise ArithmeticError(f"beta has imaginary part {imag:.3e} for a Hermitian witness")
    beta = beta_sub.real.copy()
    inputs = tuple(tuple(PureState(v.conj(), (d,)) for v in proj_basis(d).vectors) for d in chi.dims)
    mats = [proj_basis(d).matrices() for d in chi.dims]
    error = float(np.linalg.norm(reassemble(beta, mats) - chi.matrix))
    beta.setflags(write=False)
    return WitnessDecomposition(chi.dims, beta, inputs, error)


PAULI_LABELS = ("x", "y", "z", "xb", "yb", "zb")


def pauli_eigenstates() -> dict[str, PureState]:
    """Up/down eigenstates of sigma_x, sigma_y, sigma_z ('b' suffix = down)."""
    r = 1 / np.sqrt(2)
    return {
        "x": PureState(np.array([r, r]), (2,)),
        "y": PureState(np.array([r, 1j * r]), (2,)),
        "z": PureState(np.array([1, 0]), (2,)),
        "xb": PureState(np.array([r, -r]), (2,)),
        "yb": PureState(np.array([r, -1j * r]), (2,)),
        "zb": PureState(np.array([0, 1]), (2,)),
    }


def psi_minus_six_state_decomposition() -> dict[tuple[str, str], float]:
    """Weights of |psi-><psi-| over transposed Pauli-eigenstate projector pairs.

    ``|psi-><psi-| = sum w[s, t] P_s^T ⊗ P_t^T``; pairs with zero weight are
    included so the table is the full 6 x 6 grid.
    """
    table = {(s, t): 0.0 for s in PAULI_LABELS for t in PAULI_LABELS}
    table[("z", "zb")] = 0.5
    table[("zb", "z")] = 0.5
    for axis in ("x", "y"):
        bar = axis + "b"
        table[(axis, axis)] = -0.25
        table[(bar, bar)] = -0.25
        table[(axis, bar)] = 0.25
        table[(bar, axis)] = 0.25
    return table
