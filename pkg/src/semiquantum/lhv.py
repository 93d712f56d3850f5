"""Local hidden-variable models for the W_p family of qubit pairs.

Hidden variables are Haar-random qubit kets ``|lam>``. Two models are
provided:

* ``BarrettPovmModel`` simulates W_{5/12} for arbitrary qubit POVMs. Alice's
  response is contextual: every effect is split into weighted rank-one parts
  ``x_k P_k`` and the response of part ``i`` is
  ``x_i<P_i>Th(<P_i> - 1/2) + x_i/2 (1 - sum_k x_k<P_k>Th(<P_k> - 1/2))``
  with ``<.>`` the expectation in ``|lam>`` and ``Th(0) = 0``. Bob's part
  response is ``y (1 - <lam_perp|Q|lam_perp>)``.
* ``WernerProjectiveModel`` simulates W_{1/2} for projective measurements:
  Alice answers ``<lam_perp|A|lam_perp>``, Bob answers 1 exactly when his
  projector's Bloch vector points away from ``lam``.

``push_through_local_ops`` turns a model for ``sigma`` into a model for
``sum (M (x) N) sigma (M (x) N)^dag`` by feeding ``sum M^dag A M`` to the
original responses.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .operators import (
    PAULI,
    HermitianOperator,
    InvalidArgumentError,
    Povm,
    PureState,
    born_probability,
)
from .popt import make_wp
from .random import substream

BARRETT_P = 5 / 12
WERNER_P = 1 / 2
J0 = 7 / 24
J_TILDE = 3 / 8
EFFECT_TOL = 1e-9
WEIGHT_DROP_TOL = 1e-12
RESPONSE_TOL = 1e-12
KRAUS_TOL = 1e-9
DEFAULT_CHUNK = 1 << 16


class ResponseRangeError(ArithmeticError):
    """A response left [0, 1] or failed to normalise inside a validity regime."""


# ---------------------------------------------------------------------------
# hidden variables and rank-one parts


def _perp(kets: np.ndarray) -> np.ndarray:
    """Orthogonal kets; global phase fixed so the first nonzero amplitude is real positive."""
    perp = np.stack([-kets[..., 1].conj(), kets[..., 0].conj()], axis=-1)
    first = np.where(np.abs(perp[..., 0]) > 1e-15, perp[..., 0], perp[..., 1])
    phase = np.exp(-1j * np.angle(first))
    return perp * phase[..., None]


def _bloch(kets: np.ndarray) -> np.ndarray:
    a, b = kets[..., 0], kets[..., 1]
    cross = a.conj() * b
    return np.stack([2 * cross.real, 2 * cross.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1)


@dataclass(frozen=True)
class HiddenVariable:
    ket: PureState

    def __post_init__(self) -> None:
        if self.ket.dims != (2,):
            raise InvalidArgumentError(f"hidden variables are qubit kets, got dims {self.ket.dims}")

    @property
    def bloch(self) -> np.ndarray:
        return _bloch(self.ket.amplitudes)

    @property
    def perp(self) -> PureState:
        return PureState(_perp(self.ket.amplitudes), (2,))


@dataclass(frozen=True)
class RankOneEffect:
    """``weight * |vector><vector|``."""

    weight: float
    vector: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=complex).reshape(2)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-12:
            v = v / norm
        object.__setattr__(self, "vector", v)
        if not 0.0 < self.weight <= 1.0 + EFFECT_TOL:
            raise InvalidArgumentError(f"rank-one weight must lie in (0, 1], got {self.weight!r}")

    @classmethod
    def from_bloch(cls, weight: float, n: Sequence[float]) -> "RankOneEffect":
        n = np.asarray(n, dtype=float)
        theta, phi = math.acos(max(-1.0, min(1.0, n[2]))), math.atan2(n[1], n[0])
        return cls(weight, np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)]))

    @property
    def projector(self) -> HermitianOperator:
        return HermitianOperator(np.outer(self.vector, self.vector.conj()), (2,))

    @property
    def bloch(self) -> np.ndarray:
        return _bloch(self.vector)

    def operator(self) -> HermitianOperator:
        return HermitianOperator(self.weight * np.outer(self.vector, self.vector.conj()), (2,))


def sample_kets(rng: np.random.Generator, n: int) -> np.ndarray:
    """``(n, 2)`` Haar-random qubit kets."""
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_lambda(rng: np.random.Generator) -> HiddenVariable:
    return HiddenVariable(PureState(sample_kets(rng, 1)[0], (2,)))


def _matrix(effect) -> np.ndarray:
    if isinstance(effect, HermitianOperator):
        m = effect.matrix
    elif isinstance(effect, RankOneEffect):
        m = effect.operator().matrix
    else:
        m = np.asarray(effect, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidArgumentError(f"LHV models act on qubit effects, got shape {m.shape}")
    return m


def _split(effect, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-split into ``(weights, vectors)``; vectors are rows, zero weights dropped."""
    m = _matrix(effect)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if strict and (w.min() < -EFFECT_TOL or w.max() > 1 + EFFECT_TOL):
        raise InvalidArgumentError(f"effect spectrum {w} is outside [0, 1]")
    if strict:
        w = np.clip(w, 0.0, 1.0)
    keep = np.abs(w) > WEIGHT_DROP_TOL
    return w[keep], v[:, keep].T


def spectral_split(effect: HermitianOperator) -> list[RankOneEffect]:
    """Orthogonal rank-one parts ``x_i P_i`` summing to ``effect``."""
    weights, vectors = _split(effect, strict=True)
    return [RankOneEffect(float(x), v) for x, v in zip(weights, vectors)]


def _overlaps(kets: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """``|<v_k|lam_n>|^2`` as an ``(n, k)`` array."""
    return np.abs(kets @ vectors.conj().T) ** 2


def _barrett_alice_parts(weights: np.ndarray, overlaps: np.ndarray) -> np.ndarray:
    active = weights * overlaps * (overlaps > 0.5)
    return active + 0.5 * weights * (1.0 - active.sum(axis=-1, keepdims=True))


def barrett_response_alice(effects: Sequence[RankOneEffect], i: int, lam: HiddenVariable) -> float:
    """Response of rank-one part ``i`` within the full measurement ``effects``."""
    total = sum(e.operator().matrix for e in effects)
    err = float(np.linalg.norm(total - np.eye(2)))
    if err > EFFECT_TOL:
        raise InvalidArgumentError(f"rank-one parts do not sum to the identity (error {err:.3e})")
    weights = np.array([e.weight for e in effects])
    vectors = np.array([e.vector for e in effects])
    ov = _overlaps(lam.ket.amplitudes[None, :], vectors)
    return float(_barrett_alice_parts(weights, ov)[0, i])


def barrett_response_bob(effect: RankOneEffect, lam: HiddenVariable) -> float:
    perp = lam.perp.amplitudes
    return float(effect.weight * (1.0 - abs(np.vdot(effect.vector, perp)) ** 2))


# ---------------------------------------------------------------------------
# models


def _check_projective(effects: Sequence[np.ndarray], side: str) -> None:
    for k, m in enumerate(effects):
        if np.linalg.norm(m @ m - m) > EFFECT_TOL:
            raise InvalidArgumentError(f"{side} effect {k} is not a projector; this model is projective-only")


class BarrettPovmModel:
    """Contextual rank-one model reproducing W_{5/12} on all qubit POVMs."""

    name = "barrett"
    p = BARRETT_P
    projective_only = False

    def __init__(self, strict: bool = True):
        self.strict = strict

    @property
    def state(self) -> HermitianOperator:
        return make_wp(self.p).op

    def alice(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        weights, vectors, owner = [], [], []
        for k, e in enumerate(effects):
            w, v = _split(e, self.strict)
            weights.append(w)
            vectors.append(v)
            owner += [k] * len(w)
        w = np.concatenate(weights)
        v = np.concatenate(vectors)
        parts_total = (v.T * w) @ v.conj()
        err = float(np.linalg.norm(parts_total - np.eye(2)))
        if err > EFFECT_TOL:
            raise InvalidArgumentError(f"Alice's effects do not sum to the identity (error {err:.3e})")
        fine = _barrett_alice_parts(w, _overlaps(kets, v))
        coarse = np.zeros((len(w), len(effects)))
        coarse[np.arange(len(w)), owner] = 1.0
        return fine @ coarse

    def bob(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        perp = _perp(kets)
        out = np.zeros((kets.shape[0], len(effects)))
        for k, e in enumerate(effects):
            w, v = _split(e, self.strict)
            out[:, k] = ((1.0 - _overlaps(perp, v)) * w).sum(axis=1)
        return out


class WernerProjectiveModel:
    """Deterministic-Bob model reproducing W_{1/2} on projective measurements."""

    name = "werner"
    p = WERNER_P
    projective_only = True
    strict = True

    @property
    def state(self) -> HermitianOperator:
        return make_wp(self.p).op

    def alice(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        perp = _perp(kets)
        return np.stack([np.einsum("ni,ij,nj->n", perp.conj(), e, perp).real for e in effects], axis=1)

    def bob(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        _check_projective(effects, "Bob")
        out = np.zeros((kets.shape[0], len(effects)))
        for k, e in enumerate(effects):
            rank = int(round(np.trace(e).real))
            if rank == 2:
                out[:, k] = 1.0
            elif rank == 1:
                _, vecs = np.linalg.eigh(e)
                # Bloch vector of Q at an obtuse angle to lam
                out[:, k] = (_overlaps(kets, vecs[:, 1:].T)[:, 0] < 0.5).astype(float)
        return out


EffectMap = Callable[[np.ndarray], np.ndarray]


class EffectMapModel:
    """A base model whose responses see transformed effects ``map_a(A)``, ``map_b(B)``."""

    projective_only = False

    def __init__(self, base, map_a: EffectMap, map_b: EffectMap, state: HermitianOperator,
                 p: float | None = None, strict: bool = True, name: str | None = None):
        self.base = base
        self.map_a = map_a
        self.map_b = map_b
        self.state = state
        self.p = p
        self.strict = strict and base.strict
        self.name = name or base.name
        self.projective_only = base.projective_only

    def alice(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        return self.base.alice([self.map_a(e) for e in effects], kets)

    def bob(self, effects: Sequence[np.ndarray], kets: np.ndarray) -> np.ndarray:
        return self.base.bob([self.map_b(e) for e in effects], kets)


def _kraus_array(kraus: Sequence, side: str) -> np.ndarray:
    ks = np.array([_matrix(k) for k in kraus])
    if ks.ndim != 3 or ks.shape[1:] != (2, 2):
        raise InvalidArgumentError(f"{side} Kraus operators must be 2x2 matrices")
    err = float(np.linalg.norm(np.einsum("kji,kjl->il", ks.conj(), ks) - np.eye(2)))
    if err > KRAUS_TOL:
        raise InvalidArgumentError(f"{side} Kraus set is not trace preserving (error {err:.3e})")
    return ks


def _heisenberg(ks: np.ndarray) -> EffectMap:
    return lambda a: np.einsum("kji,jl,klm->im", ks.conj(), a, ks)


def push_through_local_ops(model, kraus_a: Sequence, kraus_b: Sequence, p: float | None = None):
    """Model for ``sum (M_k (x) N_l) sigma (M_k (x) N_l)^dag`` from a model for ``sigma``."""
    ka = _kraus_array(kraus_a, "Alice")
    kb = _kraus_array(kraus_b, "Bob")
    sigma = model.state.matrix
    out = np.zeros_like(sigma)
    for m in ka:
        for n in kb:
            k = np.kron(m, n)
            out = out + k @ sigma @ k.conj().T
    return EffectMapModel(model, _heisenberg(ka), _heisenberg(kb), HermitianOperator(out, (2, 2)), p=p)


def depolarizing_kraus(q: float) -> list[np.ndarray]:
    """``{sqrt(1-q) I, sqrt(q/4) sigma_0..sigma_3}``: rho -> (1-q) rho + q Tr(rho) I/2."""
    if not 0.0 <= q <= 1.0:
        raise InvalidArgumentError(f"q must lie in [0, 1], got {q}")
    return [math.sqrt(1 - q) * np.eye(2, dtype=complex)] + [math.sqrt(q / 4) * s for s in PAULI]


def depolarized_model(base, q: float) -> EffectMapModel:
    """One-sided (Alice) depolarisation: W_p -> W_{(1-q)p}."""
    return push_through_local_ops(base, depolarizing_kraus(q), [np.eye(2)], p=(1 - q) * base.p)


def model_for_p(name: str, p: float):
    """Model for W_p: native, depolarised below threshold, affinely extrapolated above.

    Above the threshold the effect map ``A -> (1-q)A + q Tr(A) I/2`` has
    ``q < 0``; it is no longer a channel, responses may leave [0, 1], and the
    returned model is non-strict so such samples are counted, not rejected.
    """
    base = {"barrett": BarrettPovmModel, "werner": WernerProjectiveModel}.get(name)
    if base is None:
        raise InvalidArgumentError(f"unknown LHV model {name!r}")
    base = base()
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    if math.isclose(p, base.p, rel_tol=0, abs_tol=1e-12):
        return base
    q = 1 - p / base.p
    if q >= 0:
        return depolarized_model(base, q)
    if isinstance(base, BarrettPovmModel):
        base = BarrettPovmModel(strict=False)

    def affine(a: np.ndarray) -> np.ndarray:
        return (1 - q) * a + q * np.trace(a) * np.eye(2) / 2

    return EffectMapModel(base, affine, lambda b: b, make_wp(p).op, p=p, strict=False)


def _resolve(model):
    if isinstance(model, str):
        return model_for_p(model, {"barrett": BARRETT_P, "werner": WERNER_P}.get(model, -1.0))
    return model


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.samples <= 0 or self.stderr < 0:
            raise InvalidArgumentError("McEstimate needs samples > 0 and stderr >= 0")

    def z(self, reference: float) -> float:
        diff = self.mean - reference
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


@dataclass(frozen=True)
class JointTable:
    """MC estimates ``P(a, b)`` indexed ``[a][b]`` plus per-sample diagnostics."""

    model: str
    p: float | None
    mean: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    out_of_range: int
    max_normalization_error: float

    def estimate(self, a: int, b: int) -> McEstimate:
        return McEstimate(float(self.mean[a, b]), float(self.stderr[a, b]), self.samples, self.seed)

    @property
    def cells(self) -> list[list[McEstimate]]:
        return [[self.estimate(a, b) for b in range(self.mean.shape[1])] for a in range(self.mean.shape[0])]

    def z_scores(self, reference: np.ndarray) -> np.ndarray:
        return np.array([[self.estimate(a, b).z(reference[a, b]) for b in range(self.mean.shape[1])]
                         for a in range(self.mean.shape[0])])

    def to_dict(self, reference: np.ndarray | None = None) -> dict:
        cells = []
        for a in range(self.mean.shape[0]):
            for b in range(self.mean.shape[1]):
                cell = {"i": a, "j": b, "mean": float(self.mean[a, b]), "stderr": float(self.stderr[a, b])}
                if reference is not None:
                    cell["born"] = float(reference[a, b])
                    cell["z"] = self.estimate(a, b).z(reference[a, b])
                cells.append(cell)
        return {
            "model": self.model,
            "p": self.p,
            "cells": cells,
            "samples": self.samples,
            "seed": self.seed,
            "out_of_range_responses": self.out_of_range,
            "max_normalization_error": self.max_normalization_error,
        }


def _effect_list(povm) -> list[np.ndarray]:
    if isinstance(povm, Povm):
        return [e.matrix for e in povm]
    return [_matrix(e) for e in povm]


def _chunk_stats(model, a_eff, b_eff, seed: int, chunk: int, n: int):
    kets = sample_kets(substream(seed, chunk), n)
    ra = model.alice(a_eff, kets)
    rb = model.bob(b_eff, kets)
    norm_err = max(float(np.max(np.abs(ra.sum(axis=1) - 1))), float(np.max(np.abs(rb.sum(axis=1) - 1))))
    bad = int(np.count_nonzero((ra < -RESPONSE_TOL) | (ra > 1 + RESPONSE_TOL)))
    bad += int(np.count_nonzero((rb < -RESPONSE_TOL) | (rb > 1 + RESPONSE_TOL)))
    prod = ra[:, :, None] * rb[:, None, :]
    return prod.sum(axis=0), (prod**2).sum(axis=0), bad, norm_err


def lhv_joint_mc(model, a_povm, b_povm, samples: int = 1_000_000, seed: int = 0,
                 chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> JointTable:
    """Monte Carlo average of response products over Haar-random ``lam``.

    Chunk ``c`` draws its hidden variables from ``substream(seed, c)`` and
    chunks are reduced in index order, so the result does not depend on
    ``workers``. In strict models a response outside [0, 1] or a response
    sum away from 1 raises ``ResponseRangeError``.
    """
    model = _resolve(model)
    samples = int(samples)
    if samples < 2:
        raise InvalidArgumentError("need at least two samples")
    a_eff, b_eff = _effect_list(a_povm), _effect_list(b_povm)
    if model.projective_only:
        _check_projective(a_eff, "Alice")
        _check_projective(b_eff, "Bob")
    sizes = [min(chunk_size, samples - start) for start in range(0, samples, chunk_size)]
    jobs = [(model, a_eff, b_eff, seed, c, n) for c, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _chunk_stats(*job), jobs))
    else:
        results = [_chunk_stats(*job) for job in jobs]
    total = np.zeros((len(a_eff), len(b_eff)))
    total_sq = np.zeros_like(total)
    bad, norm_err = 0, 0.0
    for s, sq, b, e in results:
        total += s
        total_sq += sq
        bad += b
        norm_err = max(norm_err, e)
    if model.strict and (bad or norm_err > RESPONSE_TOL):
        raise ResponseRangeError(f"{bad} responses outside [0, 1], normalisation error {norm_err:.3e}")
    mean = total / samples
    var = np.maximum(total_sq - samples * mean**2, 0.0) / (samples - 1)
    return JointTable(model.name, model.p, mean, np.sqrt(var / samples), samples, int(seed), bad, norm_err)


def born_table(state: HermitianOperator, a_povm, b_povm) -> np.ndarray:
    a_eff, b_eff = _effect_list(a_povm), _effect_list(b_povm)
    return np.array([[born_probability(state, [HermitianOperator(a, (2,)), HermitianOperator(b, (2,))])
                      for b in b_eff] for a in a_eff])


def lhv_joint_analytic(model, a: RankOneEffect, b: RankOneEffect) -> float:
    """Closed-form joint probability for rank-one (Barrett) or projective (Werner) effects."""
    model = _resolve(model)
    dot = float(np.dot(a.bloch, b.bloch))
    if isinstance(model, BarrettPovmModel):
        return a.weight * b.weight * (1 + BARRETT_P * dot) / 4
    if isinstance(model, WernerProjectiveModel):
        if abs(a.weight - 1) > EFFECT_TOL or abs(b.weight - 1) > EFFECT_TOL:
            raise InvalidArgumentError("the projective model needs unit-weight projectors")
        return (1 + WERNER_P * dot) / 4
    raise InvalidArgumentError(f"no closed form for model {getattr(model, 'name', model)!r}")


def constants_j() -> tuple[float, float]:
    """``(J0, J~) = (int_{1/2}^1 u^2 du, int_{1/2}^1 u du)`` under the uniform ``u0 = |<0|lam>|^2``."""
    return J0, J_TILDE


def constants_j_mc(samples: int = 1_000_000, seed: int = 0) -> tuple[McEstimate, McEstimate]:
    kets = sample_kets(substream(seed, 0), int(samples))
    u0 = np.abs(kets[:, 0]) ** 2
    gate = u0 > 0.5
    out = []
    for f in (gate * u0**2, gate * u0):
        out.append(McEstimate(float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples)), int(samples), int(seed)))
    return out[0], out[1]


__all__ = [
    "BARRETT_P",
    "WERNER_P",
    "BarrettPovmModel",
    "EffectMapModel",
    "HiddenVariable",
    "JointTable",
    "McEstimate",
    "RankOneEffect",
    "ResponseRangeError",
    "WernerProjectiveModel",
    "barrett_response_alice",
    "barrett_response_bob",
    "born_table",
    "constants_j",
    "constants_j_mc",
    "depolarized_model",
    "depolarizing_kraus",
    "lhv_joint_analytic",
    "lhv_joint_mc",
    "model_for_p",
    "push_through_local_ops",
    "sample_kets",
    "sample_lambda",
    "spectral_split",
]
