"""Riesz kernel W(x) = |x|^k / k with k = 2s - 1, and quadratures built on it.

The one-dimensional kernel is attractive and weakly singular. Its derivative
``W'(x) = sign(x) |x|^{2s-2}`` is not locally integrable, so every force
integral is taken in subtracted (principal value) form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special


class RegimeError(ValueError):
    """Parameters lie outside the range where the model is well posed."""


@dataclass(frozen=True)
class RieszParams:
    """Exponents of the Navier-Stokes-Riesz system.

    Parameters
    ----------
    s : float
        Interaction exponent, ``0 < s < 1/2``.
    gamma : float
        Adiabatic exponent, must exceed ``2(1 - s)``.
    strict_regime : bool
        Also require ``3/8 < s < 1/2`` and ``gamma < 1 + 2s/3`` (the window
        in which the decay estimates are proven).
    """

    s: float = 0.45
    gamma: float = 1.2
    strict_regime: bool = False

    def __post_init__(self):
        s, g = float(self.s), float(self.gamma)
        if not (0.0 < s < 0.5):
            raise RegimeError(f"s must lie in (0, 1/2), got {s}")
        if not g > 2.0 * (1.0 - s):
            raise RegimeError(
                f"gamma = {g} does not exceed 2(1-s) = {2 * (1 - s):.6g}; "
                "attraction dominates and no stable equilibrium is expected")
        if self.strict_regime:
            if not (0.375 < s < 0.5):
                raise RegimeError(f"strict regime needs 3/8 < s < 1/2, got {s}")
            if not g < 1.0 + 2.0 * s / 3.0:
                raise RegimeError(
                    f"strict regime needs gamma < 1 + 2s/3 = {1 + 2 * s / 3:.6g}")

    @property
    def k(self) -> float:
        return 2.0 * self.s - 1.0

    def to_dict(self) -> dict:
        return {"s": float(self.s), "gamma": float(self.gamma),
                "strict_regime": bool(self.strict_regime)}


def _nonzero(x):
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise ValueError("kernel is singular at x = 0")
    return x


def riesz_w(x, p: RieszParams):
    """Kernel value ``|x|^k / k``; negative for every ``x != 0``."""
    x = _nonzero(x)
    return np.abs(x) ** p.k / p.k


def riesz_w_prime(x, p: RieszParams):
    """Kernel derivative ``sign(x) |x|^{2s-2}``."""
    x = _nonzero(x)
    return np.sign(x) * np.abs(x) ** (p.k - 1.0)


def riesz_w_second(x, p: RieszParams):
    """Second derivative ``(2s-2) |x|^{2s-3}``."""
    x = _nonzero(x)
    return (p.k - 1.0) * np.abs(x) ** (p.k - 2.0)


def _wp_matrix(d, p: RieszParams):
    # W'(d) with zeros on exact-zero entries (self pairs)
    out = np.zeros_like(d)
    nz = d != 0.0
    out[nz] = np.sign(d[nz]) * np.abs(d[nz]) ** (p.k - 1.0)
    return out


def exterior_tail(x, left, right, p: RieszParams):
    """``int_{|z| outside [left, right]} W'(x - z) dz`` for ``left < x < right``.

    Closed form from the antiderivative ``|u|^{2s-1}/(2s-1)``.
    """
    x = np.asarray(x, dtype=float)
    return ((x - left) ** p.k - (right - x) ** p.k) / (1.0 - 2.0 * p.s)


def _check_density(rho, tol):
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 1 or rho.size < 3:
        raise ValueError("density must be a 1-D array with at least 3 nodes")
    if np.any(rho < -tol):
        raise ValueError("density has negative values")
    return rho


def potential_gradient_all(rho, grid, p: RieszParams, neg_tol: float = 1e-12):
    """Subtracted potential gradient at every node.

    Evaluates ``int W'(x_i - y) (rho~(y) - rho(x_i)) dy`` where ``rho~`` is the
    zero extension of the sampled density outside ``[grid[0], grid[-1]]``.

    The interior integral uses trapezoid weights with the self node dropped.
    The dropped singular cell is restored to leading order by the
    zeta-function correction ``2 zeta(1-2s) rho'(x_i) h^{2s}``, which makes the
    rule second order for smooth densities. The exterior part, where the
    integrand is ``-rho(x_i) W'(x_i - y)``, is integrated in closed form.

    Parameters
    ----------
    rho : array_like
        Nodal density on the uniform grid.
    grid : array_like
        Uniform nodes.
    p : RieszParams

    Returns
    -------
    numpy.ndarray
        Force values at all nodes. Endpoint values are only finite when the
        density vanishes there.
    """
    rho = _check_density(rho, neg_tol)
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    h = (grid[-1] - grid[0]) / (n - 1)
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=0.0):
        raise ValueError("grid must be uniform")

    wts = np.full(n, h)
    wts[0] = wts[-1] = 0.5 * h
    wp = _wp_matrix(grid[:, None] - grid[None, :], p)
    diff = rho[None, :] - rho[:, None]
    g = np.einsum("ij,ij,j->i", wp, diff, wts)

    slope = np.gradient(rho, h)
    zc = special.zeta(1.0 - 2.0 * p.s)
    interior = np.ones(n, dtype=bool)
    interior[0] = interior[-1] = False
    g[interior] += 2.0 * zc * slope[interior] * h ** (2.0 * p.s)
    # one-sided correction at the endpoints
    g[[0, -1]] += zc * slope[[0, -1]] * h ** (2.0 * p.s)

    left, right = grid[0], grid[-1]
    g[interior] += -rho[interior] * exterior_tail(grid[interior], left, right, p)
    # a jump to vacuum at an endpoint makes the exterior integral diverge
    if rho[0] != 0.0:
        g[0] = np.inf
    if rho[-1] != 0.0:
        g[-1] = -np.inf
    return g


def potential_gradient(rho, grid, index: int, p: RieszParams, neg_tol: float = 1e-12):
    """Subtracted potential gradient at a single node.

    Raises ``ValueError`` when ``index`` lies outside the grid or outside the
    support of the density.
    """
    rho = _check_density(rho, neg_tol)
    n = rho.size
    if not (0 <= index < n):
        raise IndexError(f"query index {index} outside grid of {n} nodes")
    pos = np.nonzero(rho > 0.0)[0]
    if pos.size == 0:
        return 0.0
    lo, hi = max(pos[0] - 1, 0), min(pos[-1] + 1, n - 1)
    if not (lo <= index <= hi):
        raise ValueError(f"query index {index} outside the support of the density")
    return float(potential_gradient_all(rho, grid, p, neg_tol)[index])


def beta_fn(a: float, b: float) -> float:
    """Euler Beta function ``B(a, b)`` via log-Gamma."""
    if not (a > 0 and b > 0):
        raise ValueError("Beta function needs positive arguments")
    return float(np.exp(special.betaln(a, b)))


def beta_quadrature(a: float, b: float) -> float:
    """Beta function from its defining integral (endpoint singularities handled
    by algebraic-weight quadrature)."""
    if not (a > 0 and b > 0):
        raise ValueError("Beta function needs positive arguments")
    val, _ = integrate.quad(lambda t: 1.0, 0.0, 1.0, weight="alg",
                            wvar=(a - 1.0, b - 1.0), epsabs=0.0, epsrel=1e-13)
    return float(val)


def weighted_beta_integral(x: float, alpha: float, s: float) -> float:
    """``int_{-1}^{x} (1+y)^{-alpha} (x-y)^{2s-1} dy`` by quadrature.

    Closed form is ``(1+x)^{2s-alpha} B(1-alpha, 2s)``.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if x <= -1.0:
        return 0.0
    val, _ = integrate.quad(lambda y: 1.0, -1.0, x, weight="alg",
                            wvar=(-alpha, 2.0 * s - 1.0), epsabs=0.0, epsrel=1e-13)
    return float(val)
