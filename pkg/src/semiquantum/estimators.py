"""scikit-learn style wrappers around classification, game synthesis and LHV runs."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_is_fitted, check_operator, check_operators, check_probability
from .game import analytic_payoff, canonical_prover_strategy, evaluate_payoff, synthesize_game
from .lhv import BARRETT_P, WERNER_P, born_table, lhv_joint_mc, model_for_p
from .operators import PSD_TOL
from .popt import POPT_TOL, SEESAW_ITERS, SEESAW_RESTARTS, classify


class PoptClassifier(BaseEstimator):
    """Labels operators Quantum / BeyondQuantumCandidate / NotPopt.

    Stateless: ``fit`` only validates its input.
    """

    def __init__(self, restarts=SEESAW_RESTARTS, iters=SEESAW_ITERS, seed=0,
                 psd_tol=PSD_TOL, popt_tol=POPT_TOL, dims=None):
        self.restarts = restarts
        self.iters = iters
        self.seed = seed
        self.psd_tol = psd_tol
        self.popt_tol = popt_tol
        self.dims = dims

    def fit(self, X, y=None):
        check_operators(X, self.dims)
        self.classes_ = np.array(["Quantum", "BeyondQuantumCandidate", "NotPopt"])
        return self

    def predict(self, X) -> np.ndarray:
        return np.array([r.verdict.value for r in self.classify(X)])

    def classify(self, X):
        return [
            classify(op, self.restarts, self.iters, self.seed, self.psd_tol, self.popt_tol)
            for op in check_operators(X, self.dims)
        ]


class GameSynthesizer(BaseEstimator, TransformerMixin):
    """Fit on one non-PSD operator; transform states into canonical-strategy payoffs."""

    def __init__(self, eig_pick="most_negative", report_tol=1e-9, dims=None):
        self.eig_pick = eig_pick
        self.report_tol = report_tol
        self.dims = dims

    def fit(self, X, y=None):
        w = check_operator(X, self.dims)
        self.game_, self.witness_ = synthesize_game(w, self.eig_pick)
        self.payoff_ = analytic_payoff(self.game_, w)
        return self

    def transform(self, X) -> np.ndarray:
        """Exact payoffs, one row per state."""
        check_is_fitted(self, "game_")
        ops = check_operators(X, self.game_.dims)
        return np.array([[evaluate_payoff(self.game_, canonical_prover_strategy(op)).payoff] for op in ops])

    def predict(self, X) -> np.ndarray:
        """True where the payoff certifies the state as beyond quantum."""
        return self.transform(X)[:, 0] < -self.report_tol

    def score(self, X, y=None) -> float:
        """Mean negativity ``-min(0, payoff)``."""
        return float(np.mean(np.maximum(-self.transform(X)[:, 0], 0.0)))


class LhvSimulator(BaseEstimator):
    """Monte Carlo joint table for a pair of qubit POVMs."""

    def __init__(self, model="barrett", p=None, samples=1_000_000, seed=0, workers=1):
        self.model = model
        self.p = p
        self.samples = samples
        self.seed = seed
        self.workers = workers

    def fit(self, X, y=None):
        """``X = (alice_povm, bob_povm)``."""
        a, b = X
        p = {"barrett": BARRETT_P, "werner": WERNER_P}.get(self.model) if self.p is None else self.p
        model = model_for_p(self.model, check_probability(p))
        self.table_ = lhv_joint_mc(model, a, b, self.samples, self.seed, workers=self.workers)
        self.born_ = born_table(model.state, a, b)
        self.z_ = self.table_.z_scores(self.born_)
        return self

    def predict(self, X=None) -> np.ndarray:
        check_is_fitted(self, "table_")
        return self.table_.mean
