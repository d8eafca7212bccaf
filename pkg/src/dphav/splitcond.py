"""Balanced beam-splitter splitting and photon-number-resolved conditioning.

After a 50:50 splitter each arm, given the PHAV phase ``phi``, holds a coherent
state of amplitude ``+-(a_t + b_t e^{i phi})`` with ``a_t = alpha/sqrt(2)`` and
``b_t = beta/sqrt(2)``.  Conditioning on the count ``m1`` of the reflected arm
reweights the phase by the acceptance probability of ``m1``; the transmitted
arm is then a phase mixture of coherent states with that weight.
"""

import math
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import pdtr, pdtrc

from dphav._validation import check_count, check_efficiency
from dphav.exceptions import DomainError, VanishingAcceptanceError
from dphav.fock import FockDensityMatrix, poisson_pmf
from dphav.quadrature import DEFAULT_POINTS, phase_grid
from dphav.states import PhotonDistribution, resolve_cutoff, _real_gauge, phase_mixture_matrix

MIN_ACCEPTANCE = 1e-300


class SplitAmplitudes(NamedTuple):
    """Amplitudes of one splitter output: displacement ``a_t`` and PHAV radius ``b_t``."""

    a_t: float
    b_t: float

    @property
    def max_intensity(self):
        return (self.a_t + self.b_t) ** 2

    def intensity(self, cos):
        """``|a_t + b_t e^{i phi}|^2`` as a function of ``cos(phi)``."""
        return np.maximum(self.a_t**2 + self.b_t**2 + 2.0 * self.a_t * self.b_t * cos, 0.0)


def split(spec):
    """Transmitted-arm amplitudes of a DPHAV state mixed with vacuum at a 50:50 splitter."""
    r = math.sqrt(0.5)
    return SplitAmplitudes(spec.alpha * r, spec.beta * r)


_RULE_ALIASES = {
    "eq": "eq", "=": "eq", "==": "eq",
    "neq": "neq", "ne": "neq", "!=": "neq",
    "gt": "gt", ">": "gt",
    "leq": "leq", "le": "leq", "<=": "leq",
    "window": "window",
    "all": "all",
}


@dataclass(frozen=True)
class AcceptanceRule:
    """Predicate on the conditioning-arm count.

    ``kind`` is one of ``window`` (``k1 <= m <= k2``), ``eq``, ``neq``, ``gt``,
    ``leq`` (compared against ``m1``) or ``all``.  Build rules with the class
    methods or :meth:`parse`.
    """

    kind: str
    k1: int = 0
    k2: int = 0

    def __post_init__(self):
        if self.kind not in {"window", "eq", "neq", "gt", "leq", "all"}:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        check_count(self.k1, "k1")
        check_count(self.k2, "k2")
        if self.kind == "window" and self.k1 > self.k2:
            raise ValueError(f"window rule needs k1 <= k2, got ({self.k1}, {self.k2})")

    @classmethod
    def window(cls, k1, k2):
        return cls("window", k1, k2)

    @classmethod
    def eq(cls, m1):
        return cls("eq", m1, m1)

    @classmethod
    def neq(cls, m1):
        return cls("neq", m1, m1)

    @classmethod
    def gt(cls, m1):
        return cls("gt", m1, m1)

    @classmethod
    def leq(cls, m1):
        return cls("leq", m1, m1)

    @classmethod
    def all(cls):
        return cls("all")

    @classmethod
    def parse(cls, text):
        """Parse ``"eq:3"``, ``"=3"``, ``"window:2:5"``, ``"gt:0"`` or ``"all"``."""
        text = text.strip().lower()
        if text == "all":
            return cls.all()
        m = re.fullmatch(r"(window|[a-z]+|[=!<>]+)\s*:?\s*(\d+)(?:\s*:\s*(\d+))?", text)
        if m is None or m.group(1) not in _RULE_ALIASES:
            raise ValueError(f"cannot parse acceptance rule {text!r}")
        kind = _RULE_ALIASES[m.group(1)]
        if kind == "window":
            if m.group(3) is None:
                raise ValueError("window rule needs two bounds, e.g. 'window:2:5'")
            return cls.window(int(m.group(2)), int(m.group(3)))
        if m.group(3) is not None:
            raise ValueError(f"rule {kind!r} takes a single value")
        return getattr(cls, kind)(int(m.group(2)))

    @property
    def m1(self):
        return self.k1

    def __str__(self):
        if self.kind == "all":
            return "all"
        if self.kind == "window":
            return f"window:{self.k1}:{self.k2}"
        return f"{self.kind}:{self.k1}"

    def accepts(self, counts):
        """Boolean mask of accepted conditioning counts (vectorized)."""
        m = np.asarray(counts)
        if self.kind == "all":
            return np.ones(m.shape, dtype=bool)
        if self.kind == "window":
            return (m >= self.k1) & (m <= self.k2)
        if self.kind == "eq":
            return m == self.k1
        if self.kind == "neq":
            return m != self.k1
        if self.kind == "gt":
            return m > self.k1
        return m <= self.k1

    def probability(self, mean):
        """Probability that a Poisson(``mean``) count is accepted.

        Infinite acceptance sets are evaluated through their finite complement.
        """
        mean = np.asarray(mean, dtype=float)
        if self.kind == "all":
            return np.ones_like(mean)
        if self.kind == "eq":
            return poisson_pmf(self.k1, mean)
        if self.kind == "neq":
            return 1.0 - poisson_pmf(self.k1, mean)
        if self.kind == "leq":
            return pdtr(self.k1, mean)
        if self.kind == "gt":
            return pdtrc(self.k1, mean)
        h = np.arange(self.k1, self.k2 + 1, dtype=float)
        return poisson_pmf(h, mean[..., None]).sum(axis=-1)


def acceptance_probability_at_phase(amps, rule, eta, phi):
    """Probability that the reflected arm passes ``rule`` given PHAV phase ``phi``."""
    eta = check_efficiency(eta)
    amps = SplitAmplitudes(*amps)
    return rule.probability(eta * amps.intensity(np.cos(phi)))


class PhaseDistribution:
    """Conditional density ``p(phi)`` of the PHAV phase on the uniform grid.

    ``norm_constant`` is the acceptance probability of the rule that produced
    it.  ``weights`` are the quadrature weights ``p(phi_j) * 2 pi / N``.
    """

    __slots__ = ("grid", "density", "norm_constant", "_cos", "_sin")

    def __init__(self, density, norm_constant=1.0):
        density = np.array(density, dtype=float)
        n = density.size
        phi, cos, sin = phase_grid(n)
        if density.min() < 0:
            raise ValueError("phase density must be non-negative")
        integral = density.sum() * 2.0 * np.pi / n
        if abs(integral - 1.0) > 1e-10:
            raise ValueError(f"phase density integrates to {integral:.12g}")
        density.setflags(write=False)
        self.grid = phi
        self.density = density
        self.norm_constant = float(norm_constant)
        self._cos = cos
        self._sin = sin

    @classmethod
    def uniform(cls, n_points=DEFAULT_POINTS):
        return cls(np.full(n_points, 1.0 / (2.0 * np.pi)), 1.0)

    @property
    def n_points(self):
        return self.density.size

    @property
    def spacing(self):
        return 2.0 * np.pi / self.density.size

    @property
    def weights(self):
        return self.density * self.spacing

    @property
    def cos(self):
        return self._cos

    @property
    def sin(self):
        return self._sin

    def expect(self, values):
        """Quadrature of ``values * p`` over the grid."""
        return float(np.asarray(values) @ self.weights)

    def argmax(self):
        """Grid angle of the largest density (first occurrence, then folded to ``>= 0``)."""
        return abs(float(self.grid[int(np.argmax(self.density))]))

    def __repr__(self):
        return f"PhaseDistribution(n_points={self.n_points}, norm_constant={self.norm_constant:.6g})"


def phase_distribution(amps, rule, eta=1.0, n_points=DEFAULT_POINTS):
    """Conditional phase density given that the reflected arm passes ``rule``."""
    eta = check_efficiency(eta)
    amps = SplitAmplitudes(*amps)
    _, cos, _ = phase_grid(n_points)
    accept = rule.probability(eta * amps.intensity(cos))
    norm = float(np.mean(accept))
    if not norm > MIN_ACCEPTANCE:
        raise VanishingAcceptanceError(
            f"rule {rule} accepts nothing for amplitudes ({amps.a_t:.6g}, {amps.b_t:.6g}), eta={eta:g}"
        )
    return PhaseDistribution(accept / (2.0 * np.pi * norm), norm)


def peak_locations(amps, k):
    """Maxima of ``p(phi; k, k)`` from the closed form.

    Returns ``(-phi_max, phi_max)`` below the threshold ``(a_t + b_t)^2``,
    ``(0.0,)`` at or above it, and ``(-pi, pi)`` when ``k`` is below
    ``(a_t - b_t)^2`` so the density peaks at the edge of the interval.
    """
    a, b = SplitAmplitudes(*amps)
    if a * b <= 0:
        raise DomainError("no peak structure: the phase density is uniform when a_t * b_t = 0")
    if k >= (a + b) ** 2:
        return (0.0,)
    arg = 1.0 - ((a + b) ** 2 - k) / (2.0 * a * b)
    if arg < -1.0:
        return (-math.pi, math.pi)
    phi = math.acos(arg)
    return (-phi, phi)


def gaussian_approx(amps, k):
    """Variance of the normal approximation to ``p(phi; k, k)`` for ``k`` above threshold."""
    a, b = SplitAmplitudes(*amps)
    if a * b <= 0:
        raise DomainError("Gaussian approximation needs a_t * b_t > 0")
    threshold = (a + b) ** 2
    if k <= threshold:
        raise DomainError(f"Gaussian approximation needs k > (a_t + b_t)^2 = {threshold:.6g}, got {k}")
    return threshold / (2.0 * a * b * (k - threshold))


def normal_density(phi, variance):
    phi = np.asarray(phi, dtype=float)
    return np.exp(-(phi**2) / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)


def conditional_density_matrix(amps, pd, n_max=None):
    """Fock density matrix of the transmitted arm, a phase mixture weighted by ``pd``."""
    amps = SplitAmplitudes(*amps)
    n_max = resolve_cutoff(n_max, amps.max_intensity)
    rho = phase_mixture_matrix(amps.a_t, amps.b_t, pd.weights, pd.cos, pd.sin, n_max)
    return FockDensityMatrix(_real_gauge(rho))


def conditional_detected_dist(amps, pd, eta=1.0, m_max=None):
    """Detected-photon statistics of the transmitted arm given phase density ``pd``."""
    eta = check_efficiency(eta)
    amps = SplitAmplitudes(*amps)
    m_max = resolve_cutoff(m_max, eta * amps.max_intensity)
    m = np.arange(m_max + 1, dtype=float)
    mu = eta * amps.intensity(pd.cos)
    probs = pd.weights @ poisson_pmf(m[None, :], mu[:, None])
    return PhotonDistribution(probs)


def conditional_mean(dist):
    """Mean number of (detected) photons of a distribution."""
    return dist.mean()
