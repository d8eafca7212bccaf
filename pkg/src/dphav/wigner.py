"""Wigner functions of phase mixtures of coherent states.

Convention: ``x = (a + a^dag)/sqrt(2)``, so the vacuum has quadrature variance
1/2 and a coherent state ``|gamma>`` is a Gaussian centred at
``sqrt(2) * (Re gamma, Im gamma)``.
"""

import warnings

import numpy as np

from dphav.splitcond import SplitAmplitudes

COVERAGE_SIGMAS = 5.0


class CoverageWarning(UserWarning):
    """The phase-space grid clips a noticeable part of the Wigner function."""


def wigner_of_phase_mixture(amps, pd, grid):
    """Evaluate ``W(x, p) = sum_j w_j exp(-|r - r_j|^2) / pi`` on a grid.

    ``grid`` is a pair of 1-D arrays ``(x, p)``; the result has shape
    ``(len(x), len(p))``.  Pass ``(alpha, beta)`` with a uniform ``pd`` for an
    unconditioned DPHAV state.
    """
    a, b = SplitAmplitudes(*amps)
    x, p = (np.asarray(g, dtype=float) for g in grid)
    if x.ndim != 1 or p.ndim != 1:
        raise ValueError("grid must be a pair of 1-D coordinate arrays")
    w = pd.weights
    keep = w > 0
    cx = np.sqrt(2.0) * (a + b * pd.cos[keep])
    cp = np.sqrt(2.0) * b * pd.sin[keep]
    w = w[keep]

    mean_x, mean_p = w @ cx, w @ cp
    sd_x = np.sqrt(0.5 + w @ (cx - mean_x) ** 2)
    sd_p = np.sqrt(0.5 + w @ (cp - mean_p) ** 2)
    if (x.min() > mean_x - COVERAGE_SIGMAS * sd_x or x.max() < mean_x + COVERAGE_SIGMAS * sd_x
            or p.min() > mean_p - COVERAGE_SIGMAS * sd_p or p.max() < mean_p + COVERAGE_SIGMAS * sd_p):
        warnings.warn(
            f"grid does not cover +-{COVERAGE_SIGMAS:g} standard deviations of the state",
            CoverageWarning,
            stacklevel=2,
        )

    gx = np.exp(-((x[:, None] - cx[None, :]) ** 2))  # (nx, nphi)
    gp = np.exp(-((p[:, None] - cp[None, :]) ** 2))  # (np, nphi)
    return (gx * w[None, :]) @ gp.T / np.pi


def phase_space_grid(extent, n_points=201, center=(0.0, 0.0)):
    """Square grid of half-width ``extent`` around ``center``."""
    x = np.linspace(center[0] - extent, center[0] + extent, n_points)
    p = np.linspace(center[1] - extent, center[1] + extent, n_points)
    return x, p
