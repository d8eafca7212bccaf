"""Truncated Fock-space primitives.

Single-mode states are stored as dense density matrices in the photon-number
basis ``|0>, ..., |n_max>``.  Coherent amplitudes are evaluated in log-space so
that cutoffs of a few hundred photons do not overflow.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc, xlogy

from dphav._validation import check_count, check_nonnegative
from dphav.exceptions import NumericalError, TruncationError

POSITIVITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TruncationPolicy:
    """How to pick the photon-number cutoff for a given intensity.

    The cutoff is ``ceil(mean + 10*sqrt(mean) + 20)``, raised further if the
    Poisson tail beyond it still exceeds ``tail_tolerance``.
    """

    tail_tolerance: float = 1e-12
    hard_cap: int = 2000

    def __post_init__(self):
        if not 0 < self.tail_tolerance < 1:
            raise ValueError(f"tail_tolerance must lie in (0, 1), got {self.tail_tolerance}")
        check_count(self.hard_cap, "hard_cap", minimum=1)


DEFAULT_POLICY = TruncationPolicy()


def choose_cutoff(mean, policy=DEFAULT_POLICY):
    """Smallest safe cutoff ``n_max`` for Poisson-tailed states of intensity ``mean``.

    ``mean`` should be the largest intensity reachable by the state, e.g.
    ``(alpha + beta)**2`` for a displaced phase-averaged state.
    """
    mean = check_nonnegative(mean, "mean")
    n_max = math.ceil(mean + 10.0 * math.sqrt(mean) + 20.0)
    while n_max <= policy.hard_cap and pdtrc(n_max, mean) >= policy.tail_tolerance:
        n_max += 1
    if n_max > policy.hard_cap:
        raise TruncationError(
            f"intensity {mean:g} needs a cutoff above hard_cap={policy.hard_cap}"
        )
    return n_max


def poisson_pmf(k, mean):
    """Poisson probabilities ``exp(-mean) mean**k / k!`` (broadcasting, log-space)."""
    k = np.asarray(k, dtype=float)
    mean = np.asarray(mean, dtype=float)
    return np.exp(xlogy(k, mean) - mean - gammaln(k + 1.0))


def coherent_overlap(gamma, n):
    """Fock amplitude ``<n|gamma> = exp(-|gamma|^2/2) gamma^n / sqrt(n!)``."""
    n = check_count(n, "n")
    gamma = complex(gamma)
    r = abs(gamma)
    if r == 0.0:
        return complex(n == 0)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * math.lgamma(n + 1)
    return cmath.exp(log_mag + 1j * n * cmath.phase(gamma))


def coherent_amplitudes(gammas, n_max):
    """Matrix of ``<n|gamma_j>`` with shape ``(len(gammas), n_max + 1)``."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=complex))
    n = np.arange(n_max + 1, dtype=float)
    r = np.abs(gammas)[:, None]
    theta = np.angle(gammas)[:, None]
    log_mag = -0.5 * r**2 + xlogy(n[None, :], r) - 0.5 * gammaln(n + 1.0)[None, :]
    return np.exp(log_mag + 1j * n[None, :] * theta)


class FockDensityMatrix:
    """Hermitian density matrix truncated at ``dim - 1`` photons.

    The stored matrix is made exactly Hermitian on construction and is
    read-only afterwards.
    """

    __slots__ = ("_elements",)

    def __init__(self, elements):
        m = np.array(elements, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"density matrix must be square and non-empty, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix has non-finite entries")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self._elements = m

    @property
    def elements(self):
        return self._elements

    @property
    def dim(self):
        return self._elements.shape[0]

    @property
    def n_max(self):
        return self.dim - 1

    def trace(self):
        return float(np.trace(self._elements).real)

    def diagonal(self):
        """Photon-number probabilities ``<n|rho|n>``."""
        return self._elements.diagonal().real.copy()

    def eigenvalues(self):
        try:
            return np.linalg.eigvalsh(self._elements)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc

    def normalized(self):
        return FockDensityMatrix(self._elements / self.trace())

    def check(self, trace_tol=1e-10, positivity_tol=POSITIVITY_TOLERANCE):
        """Raise ``ValueError`` unless trace and positivity invariants hold."""
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr:.15g} differs from 1 by more than {trace_tol:g}")
        lam_min = self.eigenvalues().min()
        if lam_min < -positivity_tol:
            raise ValueError(f"negative eigenvalue {lam_min:.3g}")
        return self

    def __repr__(self):
        return f"FockDensityMatrix(dim={self.dim}, trace={self.trace():.12f})"

    @classmethod
    def from_pure(cls, amplitudes):
        psi = np.asarray(amplitudes, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def from_diagonal(cls, probs):
        return cls(np.diag(np.asarray(probs, dtype=float)))


def von_neumann_entropy(rho, positivity_tolerance=POSITIVITY_TOLERANCE):
    """Entropy ``-Tr[rho ln rho]`` in nats.

    Eigenvalues below ``positivity_tolerance`` are treated as exact zeros.
    """
    lam = rho.eigenvalues() if isinstance(rho, FockDensityMatrix) else _eigvalsh(rho)
    lam = np.where(lam < positivity_tolerance, 0.0, lam)
    return float(-np.sum(xlogy(lam, lam)))


def _eigvalsh(matrix):
    try:
        return np.linalg.eigvalsh(np.asarray(matrix))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc


def shannon_entropy(probs):
    """Shannon entropy ``-sum p ln p`` in nats, with ``0 ln 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    return float(-np.sum(xlogy(p, np.clip(p, 0.0, None))))


def thermal_entropy(mean):
    """Entropy of a thermal state with ``mean`` photons: ``(n+1)ln(n+1) - n ln n``."""
    mean = check_nonnegative(mean, "mean")
    return float(xlogy(mean + 1.0, mean + 1.0) - xlogy(mean, mean))
