"""Uniform periodic trapezoid rule on the phase circle [-pi, pi)."""

from functools import lru_cache

import numpy as np

from dphav.exceptions import NumericalError

DEFAULT_POINTS = 1024
REFINE_TOL = 1e-12
MAX_POINTS = 1 << 16


@lru_cache(maxsize=16)
def _phase_grid(n_points):
    j = np.arange(n_points)
    phi = -np.pi + 2.0 * np.pi * j / n_points
    cos = np.cos(phi)
    sin = np.sin(phi)
    # mirror phi_j <-> phi_{N-j} so that even integrands are exactly even
    cos[1:] = 0.5 * (cos[1:] + cos[1:][::-1])
    sin[1:] = 0.5 * (sin[1:] - sin[1:][::-1])
    sin[0] = 0.0
    if n_points % 2 == 0:
        cos[n_points // 2] = 1.0
        sin[n_points // 2] = 0.0
    cos[0] = -1.0
    for arr in (phi, cos, sin):
        arr.setflags(write=False)
    return phi, cos, sin


def phase_grid(n_points=DEFAULT_POINTS):
    """Return ``(phi, cos(phi), sin(phi))`` on the uniform grid of ``n_points`` angles.

    The grid starts at ``-pi`` and contains ``-phi`` for every ``phi`` (modulo
    ``2*pi``); the cosine table is exactly even and the sine table exactly odd
    under that reflection.
    """
    if n_points < 2 or n_points % 2:
        raise ValueError(f"n_points must be an even integer >= 2, got {n_points}")
    return _phase_grid(int(n_points))


def circle_mean(func, n_points=DEFAULT_POINTS, tol=REFINE_TOL, max_points=MAX_POINTS):
    """Average ``(1/2pi) * integral func(cos phi, sin phi) dphi`` with automatic refinement.

    ``func`` maps arrays of cosines and sines to an array whose leading axis
    runs over the grid; the grid is doubled until two successive results agree to ``tol``
    in max norm.  Returns ``(value, n_points_used)``.
    """
    _, cos, sin = phase_grid(n_points)
    prev = np.mean(func(cos, sin), axis=0)
    while True:
        n_points *= 2
        if n_points > max_points:
            raise NumericalError(f"phase quadrature did not settle below {tol:g}")
        _, cos, sin = phase_grid(n_points)
        cur = np.mean(func(cos, sin), axis=0)
        if np.max(np.abs(cur - prev)) < tol:
            return cur, n_points
        prev = cur
