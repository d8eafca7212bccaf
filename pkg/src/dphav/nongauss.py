"""Relative-entropy non-Gaussianity of phase mixtures of coherent states.

The reference Gaussian matches the first and second quadrature moments of the
state.  For a single mode its entropy follows from the symplectic eigenvalue
``nu = sqrt(det V)`` of the covariance matrix ``V`` (vacuum: ``nu = 1/2``).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from dphav._validation import check_nonnegative
from dphav.exceptions import InvalidCovarianceError
from dphav.fock import (
    DEFAULT_POLICY,
    choose_cutoff,
    poisson_pmf,
    shannon_entropy,
    thermal_entropy,
    von_neumann_entropy,
)
from dphav.splitcond import SplitAmplitudes

SHOT_NOISE = 0.5


@dataclass(frozen=True)
class CovarianceSummary:
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov_xy: float

    @property
    def determinant(self):
        return self.var_x * self.var_y - self.cov_xy**2

    def matrix(self):
        return np.array([[self.var_x, self.cov_xy], [self.cov_xy, self.var_y]])


@dataclass(frozen=True)
class NonGaussReport:
    """Non-Gaussianity ``value = s_reference - s_state`` (nats)."""

    s_reference: float
    s_state: float
    value: float
    kind: str
    covariance: CovarianceSummary = None


def covariance_of_conditional(amps, pd):
    """Quadrature means and covariances of ``integral p(phi) |a + b e^{i phi}><.| dphi``."""
    a, b = SplitAmplitudes(*amps)
    c1 = pd.expect(pd.cos)
    s1 = pd.expect(pd.sin)
    c2 = pd.expect(pd.cos**2)
    s2 = pd.expect(pd.sin**2)
    cs = pd.expect(pd.cos * pd.sin)
    two_b2 = 2.0 * b * b
    return CovarianceSummary(
        mean_x=math.sqrt(2.0) * (a + b * c1),
        mean_y=math.sqrt(2.0) * b * s1,
        var_x=SHOT_NOISE + two_b2 * (c2 - c1 * c1),
        var_y=SHOT_NOISE + two_b2 * (s2 - s1 * s1),
        cov_xy=two_b2 * (cs - c1 * s1),
    )


def reference_gaussian_entropy(cov, tol=1e-12):
    """Entropy of the Gaussian state with covariance ``cov`` (nats)."""
    det = cov.determinant
    if det < 0.25 - tol:
        raise InvalidCovarianceError(f"det V = {det:.15g} violates the uncertainty bound 1/4")
    nu = math.sqrt(max(det, 0.25))
    return float(xlogy(nu + 0.5, nu + 0.5) - xlogy(nu - 0.5, nu - 0.5))


def delta_full(rho, cov):
    """Relative entropy of non-Gaussianity from the full density matrix."""
    s_ref = reference_gaussian_entropy(cov)
    s_rho = von_neumann_entropy(rho)
    return NonGaussReport(s_ref, s_rho, s_ref - s_rho, "delta_full", cov)


def _poisson_entropy(mean, tail=1e-14):
    """Shannon entropy of Poisson(``mean``), summed until the tail is below ``tail``."""
    policy = DEFAULT_POLICY.__class__(tail_tolerance=tail, hard_cap=DEFAULT_POLICY.hard_cap)
    k = np.arange(choose_cutoff(mean, policy) + 1)
    return shannon_entropy(poisson_pmf(k, mean))


def delta_diagonal(mean):
    """Non-Gaussianity of a PHAV state (or any displacement of it) with ``mean`` photons.

    Thermal entropy at the same mean minus the Shannon entropy of the Poisson
    statistics.
    """
    mean = check_nonnegative(mean, "mean")
    s_ref = thermal_entropy(mean)
    s_state = _poisson_entropy(mean)
    return NonGaussReport(s_ref, s_state, s_ref - s_state, "delta_diagonal")


def epsilon_bound(detected):
    """Lower bound from detected-photon statistics: thermal entropy at the measured
    mean minus the Shannon entropy of the measured distribution."""
    probs = getattr(detected, "probs", detected)
    probs = np.asarray(probs, dtype=float)
    mean = float(np.arange(probs.size) @ probs)
    s_ref = thermal_entropy(mean)
    s_state = shannon_entropy(probs)
    return NonGaussReport(s_ref, s_state, s_ref - s_state, "epsilon_bound")
