"""scikit-learn compatible wrappers.

:class:`ConditionalStateModel` computes the analytic conditional state for a
fixed source and rule; :class:`ConditionalHistogram` learns the conditional
signal-arm histogram from shot records.  Both follow the estimator protocol
(``get_params``/``set_params``, fitted attributes with a trailing underscore)
so they can sit inside grid searches and pipelines.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from dphav._validation import check_efficiency, check_nonnegative, check_records
from dphav.nongauss import covariance_of_conditional, delta_full, epsilon_bound
from dphav.shotsim import fidelity, reconstruct_conditional
from dphav.splitcond import (
    AcceptanceRule,
    conditional_density_matrix,
    conditional_detected_dist,
    phase_distribution,
    split,
)
from dphav.states import DphavSpec


def _as_rule(rule):
    return rule if isinstance(rule, AcceptanceRule) else AcceptanceRule.parse(str(rule))


class ConditionalStateModel(BaseEstimator):
    """Analytic conditional state of the transmitted arm.

    Parameters
    ----------
    alpha2, beta2 : float
        Displacement and PHAV intensities of the source.
    eta : float
        Detection efficiency applied to both arms.
    rule : str or AcceptanceRule
        Conditioning rule on the reflected arm, e.g. ``"eq:3"``.
    n_points : int
        Size of the phase grid.
    """

    def __init__(self, alpha2=1.0, beta2=1.0, eta=1.0, rule="all", n_points=1024):
        self.alpha2 = alpha2
        self.beta2 = beta2
        self.eta = eta
        self.rule = rule
        self.n_points = n_points

    def fit(self, X=None, y=None):
        """Build the conditional state.  ``X`` is ignored (the model is analytic)."""
        check_nonnegative(self.alpha2, "alpha2")
        check_nonnegative(self.beta2, "beta2")
        eta = check_efficiency(self.eta)
        spec = DphavSpec.from_intensities(self.alpha2, self.beta2)
        self.spec_ = spec
        self.amplitudes_ = split(spec)
        self.rule_ = _as_rule(self.rule)
        self.phase_distribution_ = phase_distribution(self.amplitudes_, self.rule_, eta, self.n_points)
        self.acceptance_ = self.phase_distribution_.norm_constant
        self.detected_distribution_ = conditional_detected_dist(
            self.amplitudes_, self.phase_distribution_, eta
        )
        self.covariance_ = covariance_of_conditional(self.amplitudes_, self.phase_distribution_)
        return self

    def predict_proba(self, m):
        """Probability of detecting ``m`` signal photons given acceptance."""
        check_is_fitted(self)
        p = self.detected_distribution_.probs
        m = np.asarray(m)
        return np.where((m >= 0) & (m < p.size), p[np.clip(m, 0, p.size - 1)], 0.0)

    def density_matrix(self, n_max=None):
        check_is_fitted(self)
        return conditional_density_matrix(self.amplitudes_, self.phase_distribution_, n_max)

    def epsilon(self):
        check_is_fitted(self)
        return epsilon_bound(self.detected_distribution_)

    def delta(self):
        check_is_fitted(self)
        return delta_full(self.density_matrix(), self.covariance_)

    def score(self, X, y=None):
        """Fidelity between the conditional histogram of records ``X`` and the model."""
        check_is_fitted(self)
        hist = reconstruct_conditional(check_records(X), self.rule_)
        return fidelity(hist.distribution, self.detected_distribution_)


class ConditionalHistogram(BaseEstimator):
    """Empirical signal-arm statistics of the shots accepted by ``rule``."""

    def __init__(self, rule="all"):
        self.rule = rule

    def fit(self, X, y=None):
        X = check_records(X)
        result = reconstruct_conditional(X, _as_rule(self.rule))
        self.distribution_ = result.distribution
        self.mean_ = result.mean
        self.acceptance_ = result.acceptance
        self.n_accepted_ = result.n_accepted
        self.n_shots_ = X.shape[0]
        return self

    def score(self, X, y=None):
        """Fidelity between this histogram and the one reconstructed from ``X``."""
        check_is_fitted(self)
        other = reconstruct_conditional(check_records(X), _as_rule(self.rule))
        return fidelity(self.distribution_, other.distribution)
