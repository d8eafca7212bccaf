"""Detection layer: binomial thinning at efficiency eta, two-arm joint
statistics and intensity-correlation coefficients."""

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from dphav._validation import check_efficiency, check_nonnegative
from dphav.exceptions import DomainError
from dphav.fock import DEFAULT_POLICY, choose_cutoff, poisson_pmf
from dphav.quadrature import DEFAULT_POINTS, circle_mean
from dphav.splitcond import split
from dphav.states import PhotonDistribution, resolve_cutoff, dphav_photon_dist_quadrature


class JointDetectedDistribution:
    """Joint probabilities ``probs[m1, m2]`` of the two splitter outputs."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.array(probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("joint distribution must be a 2-D array")
        p.setflags(write=False)
        self.probs = p

    def marginal(self, arm):
        return PhotonDistribution(self.probs.sum(axis=1 - arm))

    def pearson(self):
        """Pearson correlation coefficient between the two counts."""
        p = self.probs
        m1 = np.arange(p.shape[0], dtype=float)
        m2 = np.arange(p.shape[1], dtype=float)
        p1, p2 = p.sum(axis=1), p.sum(axis=0)
        mu1, mu2 = m1 @ p1, m2 @ p2
        var1 = ((m1 - mu1) ** 2) @ p1
        var2 = ((m2 - mu2) ** 2) @ p2
        cov = (m1 - mu1) @ p @ (m2 - mu2)
        return float(cov / np.sqrt(var1 * var2))


def thinning_matrix(size, eta):
    """Column-stochastic kernel ``K[m, s] = C(s, m) eta^m (1 - eta)^(s - m)``."""
    eta = check_efficiency(eta)
    s = np.arange(size, dtype=float)[None, :]
    m = np.arange(size, dtype=float)[:, None]
    valid = m <= s
    mm = np.where(valid, m, 0.0)
    logk = (gammaln(s + 1) - gammaln(mm + 1) - gammaln(s - mm + 1)
            + xlogy(mm, eta) + xlog1py(s - mm, -eta))
    return np.where(valid, np.exp(logk), 0.0)


def bernoulli_map(dist, eta):
    """Detected-photon statistics of ``dist`` seen through efficiency ``eta``."""
    probs = getattr(dist, "probs", dist)
    probs = np.asarray(probs, dtype=float)
    return PhotonDistribution(thinning_matrix(probs.size, eta) @ probs)


def rescaling_equivalence_check(spec, eta, n_max=None):
    """Max-norm gap between thinning the DPHAV statistics and rescaling its intensities."""
    eta = check_efficiency(eta)
    if n_max is None:
        n_max = choose_cutoff(spec.max_intensity, DEFAULT_POLICY)
    thinned = bernoulli_map(dphav_photon_dist_quadrature(spec, n_max), eta)
    rescaled = dphav_photon_dist_quadrature(spec.scaled(eta), n_max)
    return float(np.max(np.abs(thinned.probs - rescaled.probs)))


def joint_detected_dist(spec, eta=1.0, m_max=None, n_points=DEFAULT_POINTS):
    """Joint detected counts of both splitter outputs (independent given the phase)."""
    eta = check_efficiency(eta)
    amps = split(spec)
    m_max = resolve_cutoff(m_max, eta * amps.max_intensity)
    m = np.arange(m_max + 1, dtype=float)

    def integrand(cos, sin):
        pk = poisson_pmf(m[None, :], eta * amps.intensity(cos)[:, None])
        return pk[:, :, None] * pk[:, None, :]

    probs, _ = circle_mean(integrand, n_points)
    return JointDetectedDistribution(0.5 * (probs + probs.T))


def correlation_formula(alpha_sq, beta_sq):
    """Output correlation ``a b / (a + b + a b)`` for input intensities ``a``, ``b``."""
    a = check_nonnegative(alpha_sq, "alpha_sq")
    b = check_nonnegative(beta_sq, "beta_sq")
    denom = a + b + a * b
    return 0.0 if denom == 0 else a * b / denom


def correlation_from_stats(mean, variance):
    """Output correlation of a balanced splitter from the input mean and variance."""
    mean = check_nonnegative(mean, "mean")
    variance = check_nonnegative(variance, "variance")
    if mean == 0 and variance == 0:
        raise DomainError("correlation undefined for the vacuum (mean = variance = 0)")
    return (variance - mean) / (variance + mean)
