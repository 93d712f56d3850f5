"""Seeded random operators, states and measurements."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .operators import HermitianOperator, Povm, PureState, bloch_projector


def as_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substream(seed: int, *counter: int) -> np.random.Generator:
    """Independent generator for ``(seed, *counter)``; stable across worker counts."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counter)))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))


def haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def haar_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    return PureState(haar_vector(int(np.prod(dims)), rng), tuple(dims))


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> HermitianOperator:
    """Induced-measure random density operator (Hilbert-Schmidt when ``rank`` is None)."""
    side = int(np.prod(dims))
    rank = side if rank is None else rank
    g = rng.normal(size=(side, rank)) + 1j * rng.normal(size=(side, rank))
    rho = g @ g.conj().T
    return HermitianOperator(rho / np.trace(rho).real, tuple(dims))


def random_hermitian(dims: Sequence[int], rng: np.random.Generator, unit_trace: bool = False) -> HermitianOperator:
    side = int(np.prod(dims))
    g = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
    h = 0.5 * (g + g.conj().T)
    if unit_trace:
        h = h - np.eye(side) * (np.trace(h).real - 1.0) / side
    return HermitianOperator(h, tuple(dims))


def random_bloch(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (3,) if size is None else (size, 3)
    v = rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_effect(dims: Sequence[int], rng: np.random.Generator) -> HermitianOperator:
    """Random ``0 <= E <= I``: Haar eigenbasis, uniform eigenvalues in [0, 1]."""
    side = int(np.prod(dims))
    u = haar_unitary(side, rng)
    return HermitianOperator(u @ np.diag(rng.random(side)) @ u.conj().T, tuple(dims))


def random_two_outcome_povm(dims: Sequence[int], rng: np.random.Generator, projective: bool = False) -> Povm:
    side = int(np.prod(dims))
    u = haar_unitary(side, rng)
    spectrum = rng.integers(0, 2, size=side).astype(float) if projective else rng.random(side)
    return Povm.two_outcome(HermitianOperator(u @ np.diag(spectrum) @ u.conj().T, tuple(dims)))


def random_povm(dims: Sequence[int], n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Random POVM ``{S^-1/2 G_k S^-1/2}`` from Wishart-distributed ``G_k``."""
    side = int(np.prod(dims))
    gs = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
        gs.append(g @ g.conj().T)
    s = sum(gs)
    w, v = np.linalg.eigh(s)
    s_inv_half = v @ np.diag(w**-0.5) @ v.conj().T
    return Povm(tuple(HermitianOperator(s_inv_half @ g @ s_inv_half, tuple(dims)) for g in gs))


def random_rank_one_povm(n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Qubit POVM whose effects are all weighted rank-one projectors.

    Built by Naimark-style compression: ``n_outcomes`` orthonormal rows of a
    Haar unitary restricted to a 2-dimensional subspace.
    """
    if n_outcomes < 2:
        raise ValueError("need at least two outcomes")
    u = haar_unitary(n_outcomes, rng)
    cols = u[:, :2]
    effects = tuple(
        HermitianOperator(np.outer(cols[k].conj(), cols[k]), (2,)) for k in range(n_outcomes)
    )
    return Povm(effects)


def random_projective_qubit(rng: np.random.Generator) -> Povm:
    n = random_bloch(rng)
    return Povm((bloch_projector(n), bloch_projector(-n)))
