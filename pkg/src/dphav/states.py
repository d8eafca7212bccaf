"""Phase-averaged (PHAV) and displaced phase-averaged (DPHAV) coherent states.

A DPHAV state with displacement ``alpha`` and PHAV amplitude ``beta`` is the
uniform phase mixture of coherent states ``|alpha + beta e^{i phi}>``.  Its
photon statistics depend on the intensities only through
``A = alpha^2 + beta^2`` and ``B = 2 alpha beta``.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import pdtrc

from dphav._validation import check_count, check_nonnegative
from dphav.exceptions import NumericalError, TruncationError
from dphav.fock import (
    DEFAULT_POLICY,
    FockDensityMatrix,
    choose_cutoff,
    coherent_amplitudes,
    poisson_pmf,
)
from dphav.quadrature import DEFAULT_POINTS, MAX_POINTS, REFINE_TOL, circle_mean, phase_grid

IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class DphavSpec:
    """Input amplitudes: real displacement ``alpha`` and PHAV amplitude ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_nonnegative(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_nonnegative(self.beta, "beta"))

    @classmethod
    def from_intensities(cls, alpha2, beta2):
        alpha2 = check_nonnegative(alpha2, "alpha2")
        beta2 = check_nonnegative(beta2, "beta2")
        return cls(math.sqrt(alpha2), math.sqrt(beta2))

    @property
    def alpha2(self):
        return self.alpha**2

    @property
    def beta2(self):
        return self.beta**2

    @property
    def a_param(self):
        return self.alpha**2 + self.beta**2

    @property
    def b_param(self):
        return 2.0 * self.alpha * self.beta

    @property
    def max_intensity(self):
        return (self.alpha + self.beta) ** 2

    def swapped(self):
        return DphavSpec(self.beta, self.alpha)

    def scaled(self, eta):
        """Amplitudes after loss ``eta`` (intensities multiplied by ``eta``)."""
        s = math.sqrt(eta)
        return DphavSpec(s * self.alpha, s * self.beta)


class PhotonDistribution:
    """Photon-number probabilities ``probs[k]`` for ``k = 0 .. len - 1``."""

    __slots__ = ("probs",)

    def __init__(self, probs, atol=1e-8):
        p = np.array(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D array")
        if p.min() < -atol:
            raise ValueError(f"negative probability {p.min():.3g}")
        if abs(p.sum() - 1.0) > atol:
            raise ValueError(f"probabilities sum to {p.sum():.12g}")
        p.setflags(write=False)
        self.probs = p

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        return f"PhotonDistribution(n_max={self.probs.size - 1}, mean={self.mean():.6g})"

    def mean(self):
        k = np.arange(self.probs.size)
        return float(k @ self.probs)

    def variance(self):
        k = np.arange(self.probs.size)
        mu = k @ self.probs
        return float(((k - mu) ** 2) @ self.probs)

    def padded(self, size):
        """Probabilities zero-padded (never truncated) to at least ``size`` entries."""
        if size <= self.probs.size:
            return self.probs.copy()
        return np.concatenate([self.probs, np.zeros(size - self.probs.size)])


@dataclass(frozen=True)
class PhotonMoments:
    mean: float
    variance: float
    k_factor: float


def resolve_cutoff(n_max, intensity, policy=DEFAULT_POLICY):
    """Default cutoff for ``intensity``, or validate a caller-supplied one."""
    if n_max is None:
        return choose_cutoff(intensity, policy)
    n_max = check_count(n_max, "n_max")
    if pdtrc(n_max, intensity) >= policy.tail_tolerance:
        raise TruncationError(
            f"cutoff {n_max} leaves Poisson tail {pdtrc(n_max, intensity):.3g} "
            f"at intensity {intensity:.6g}"
        )
    return n_max


def phav_photon_dist(beta_sq, n_max=None):
    """Poisson statistics of a PHAV state with mean photon number ``beta_sq``."""
    beta_sq = check_nonnegative(beta_sq, "beta_sq")
    n_max = resolve_cutoff(n_max, beta_sq)
    return PhotonDistribution(poisson_pmf(np.arange(n_max + 1), beta_sq))


def mixture_photon_probs(a, b, n_max, n_points=DEFAULT_POINTS):
    """Uniform phase average of Poisson(|a + b e^{i phi}|^2) probabilities, k <= n_max."""
    k = np.arange(n_max + 1, dtype=float)
    a_param = a * a + b * b
    b_param = 2.0 * a * b

    def integrand(cos, sin):
        mu = np.maximum(a_param + b_param * cos, 0.0)
        return poisson_pmf(k[None, :], mu[:, None])

    probs, _ = circle_mean(integrand, n_points)
    return probs


def dphav_photon_dist_quadrature(spec, n_max=None, n_points=DEFAULT_POINTS):
    """DPHAV photon statistics by periodic trapezoid quadrature over the phase."""
    n_max = resolve_cutoff(n_max, spec.max_intensity)
    return PhotonDistribution(mixture_photon_probs(spec.alpha, spec.beta, n_max, n_points))


def hyp1f2(a, b1, b2, z, tol=None, max_terms=100_000):
    """Generalized hypergeometric ``1F2(a; b1, b2; z)`` by direct series summation.

    Works with floats or ``mpmath.mpf``.  Summation stops once a term drops
    below ``tol`` times the partial sum (machine epsilon of the working
    precision by default).
    """
    if tol is None:
        tol = mpmath.mp.eps if isinstance(z, mpmath.mpf) else 1e-16
    term = z * 0 + 1
    total = term
    for n in range(max_terms):
        term = term * (a + n) / ((b1 + n) * (b2 + n) * (n + 1)) * z
        total = total + term
        if abs(term) <= tol * abs(total):
            return total
    raise NumericalError(f"1F2 series did not converge in {max_terms} terms (z={z})")


def _cos_power_moment(h, b_param, max_terms):
    """(1/2pi) * integral of cos(phi)^h exp(B cos phi) over a full period."""
    z = b_param * b_param / 4
    sqrt_pi = mpmath.sqrt(mpmath.pi)
    if h % 2 == 0:
        m = h // 2
        pref = mpmath.gamma(m + mpmath.mpf(1) / 2) / (sqrt_pi * mpmath.gamma(m + 1))
        return pref * hyp1f2(m + mpmath.mpf(1) / 2, mpmath.mpf(1) / 2, m + 1, z,
                             max_terms=max_terms)
    m = (h - 1) // 2
    pref = b_param * mpmath.gamma(m + mpmath.mpf(3) / 2) / (sqrt_pi * mpmath.gamma(m + 2))
    return pref * hyp1f2(m + mpmath.mpf(3) / 2, mpmath.mpf(3) / 2, m + 2, z,
                         max_terms=max_terms)


def dphav_photon_dist_closedform(spec, k, max_terms=100_000):
    """Single DPHAV photon probability from the hypergeometric closed form.

    Expands ``(A + B cos phi)^k`` binomially; each ``cos^h`` moment against
    ``exp(-B cos phi)`` is a 1F2 series (separate parameter sets for even and
    odd ``h``).  The alternating binomial sum cancels heavily when
    ``alpha ~ beta``, so it is carried out in extended precision sized from the
    largest term.
    """
    k = check_count(k, "k")
    a_param, b_param = spec.a_param, spec.b_param
    if a_param == 0.0:
        return float(k == 0)
    if b_param == 0.0:
        return float(poisson_pmf(k, a_param))
    # digits lost to cancellation ~ log10 of (A + B)^k e^B relative to the result
    lost = (k * math.log10(a_param + b_param) + b_param / math.log(10)
            + math.lgamma(k + 1) / math.log(10))
    dps = 25 + max(0, math.ceil(lost))
    with mpmath.workdps(dps):
        a_mp = mpmath.mpf(a_param)
        b_mp = mpmath.mpf(b_param)
        total = mpmath.mpf(0)
        for h in range(k + 1):
            moment = _cos_power_moment(h, b_mp, max_terms)
            total += mpmath.binomial(k, h) * a_mp ** (k - h) * (-b_mp) ** h * moment
        value = total * mpmath.exp(-a_mp) / mpmath.factorial(k)
        return float(value)


@dataclass(frozen=True)
class ClosedFormCheck:
    """Outcome of comparing the closed form with quadrature.

    ``failures`` lists ``(alpha2, beta2, k, closed, quadrature)`` for every
    tuple whose absolute disagreement exceeds ``tolerance``.
    """

    tolerance: float
    n_checked: int
    max_abs_error: float
    failures: tuple

    @property
    def agrees(self):
        return not self.failures

    def report(self):
        if self.agrees:
            return (f"closed form agrees with quadrature on {self.n_checked} values "
                    f"(max |diff| {self.max_abs_error:.3g} <= {self.tolerance:g})")
        lines = [f"closed form disagrees on {len(self.failures)} of {self.n_checked} values:"]
        lines += [f"  alpha2={a} beta2={b} k={k}: closed={c!r} quadrature={q!r}"
                  for a, b, k, c, q in self.failures]
        return "\n".join(lines)


def closedform_crosscheck(intensities, ks, tol=1e-8, n_points=DEFAULT_POINTS):
    """Compare closed-form and quadrature probabilities over a parameter grid."""
    failures = []
    worst = 0.0
    count = 0
    for alpha2, beta2 in intensities:
        spec = DphavSpec.from_intensities(alpha2, beta2)
        quad = dphav_photon_dist_quadrature(spec, n_points=n_points).padded(max(ks) + 1)
        for k in ks:
            closed = dphav_photon_dist_closedform(spec, k)
            err = abs(closed - quad[k])
            worst = max(worst, err)
            count += 1
            if not err <= tol:
                failures.append((alpha2, beta2, k, closed, float(quad[k])))
    return ClosedFormCheck(tol, count, worst, tuple(failures))


def dphav_moments(spec):
    """Mean, variance and excess-noise factor of the DPHAV photon statistics."""
    mean = spec.a_param
    if mean == 0.0:
        return PhotonMoments(0.0, 0.0, 0.0)
    # ratios first: mean**2 underflows for tiny intensities
    k_factor = 2.0 * (spec.alpha2 / mean) * (spec.beta2 / mean)
    return PhotonMoments(mean, mean * (k_factor * mean + 1.0), k_factor)


def phase_mixture_matrix(a, b, weights, cos, sin, n_max):
    """``sum_j w_j |gamma_j><gamma_j|`` with ``gamma_j = a + b e^{i phi_j}``.

    For weights even in ``phi`` the result is real; an imaginary residue above
    ``IMAG_RESIDUE_TOL`` raises instead of being dropped.
    """
    gammas = a + b * (cos + 1j * sin)
    amps = coherent_amplitudes(gammas, n_max)
    return (amps * weights[:, None]).T @ amps.conj()


def _real_gauge(rho):
    residue = np.max(np.abs(rho.imag)) if rho.size else 0.0
    if residue > IMAG_RESIDUE_TOL:
        raise NumericalError(f"imaginary residue {residue:.3g} in a real-gauge density matrix")
    return rho.real


def dphav_density_matrix(spec, n_max=None, n_points=DEFAULT_POINTS, tol=REFINE_TOL):
    """Fock density matrix of the DPHAV state (phase-sensitive, non-diagonal).

    The phase grid is doubled until successive matrices agree to ``tol``.
    """
    n_max = resolve_cutoff(n_max, spec.max_intensity)

    def at(n):
        _, cos, sin = phase_grid(n)
        return phase_mixture_matrix(spec.alpha, spec.beta, np.full(n, 1.0 / n), cos, sin, n_max)

    prev = at(n_points)
    while True:
        n_points *= 2
        if n_points > MAX_POINTS:
            raise NumericalError("density-matrix quadrature did not settle")
        cur = at(n_points)
        if np.max(np.abs(cur - prev)) < tol:
            return FockDensityMatrix(_real_gauge(cur))
        prev = cur
