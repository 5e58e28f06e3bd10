"""Compactly supported steady density of the Navier-Stokes-Riesz system.

The steady profile solves ``(rho^gamma)' + rho * Psi' = 0`` with
``Psi = W * rho``. Integrating from the boundary gives the fixed-point form

    rho^gamma(x) = int_x^R rho(y) Psi'(y) dy,

which is iterated on a fixed support with sup-normalisation. The map is
homogeneous of degree 2 while the left side has degree gamma < 2, so the
amplitude is recovered in closed form once the shape has converged.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .kernel import RegimeError, RieszParams, potential_gradient_all


class SteadyConvergenceError(RuntimeError):
    """Picard iteration stopped before reaching the tolerance."""

    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = list(history)


@dataclass(frozen=True, eq=False)
class SteadyProfile:
    """Steady density sampled on ``x_k = -R + k h``, ``k = 0..2N``."""

    grid: np.ndarray
    rho: np.ndarray
    radius: float
    mass: float
    s: float
    gamma: float
    residual: float = float("nan")
    iterations: int = 0
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("grid", "rho"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        """Half-grid count N (the grid has 2N + 1 nodes)."""
        return (self.grid.size - 1) // 2

    @property
    def h(self) -> float:
        return self.radius / self.n

    @property
    def params(self) -> RieszParams:
        return RieszParams(self.s, self.gamma)

    @property
    def rho_gamma(self) -> np.ndarray:
        return self.rho ** self.gamma

    def digest(self) -> str:
        """Stable content hash, used in run manifests."""
        m = hashlib.sha256()
        m.update(np.ascontiguousarray(self.grid).tobytes())
        m.update(np.ascontiguousarray(self.rho).tobytes())
        m.update(repr((self.s, self.gamma, self.radius)).encode())
        return m.hexdigest()[:16]


def _uniform_grid(n: int, radius: float) -> np.ndarray:
    return radius * np.arange(-n, n + 1) / n


def fixed_point_map(rho, grid, p: RieszParams) -> np.ndarray:
    """``P[rho](x) = int_x^R rho * Psi'`` on the right half, mirrored to the left.

    The cumulative integral uses the trapezoid rule from the right boundary.
    """
    n = (grid.size - 1) // 2
    h = grid[1] - grid[0]
    g = potential_gradient_all(rho, grid, p)
    f = rho * g
    f[[0, -1]] = 0.0
    right = f[n:]
    tail = np.concatenate([np.cumsum((0.5 * h * (right[1:] + right[:-1]))[::-1])[::-1], [0.0]])
    return np.concatenate([tail[:0:-1], tail])


def _amplitude(shape, pmap, p: RieszParams):
    # c^gamma shape^gamma = c^2 P[shape]  ->  c^{gamma-2} = <P, s^g> / <s^g, s^g>
    sg = shape ** p.gamma
    ratio = float(np.dot(pmap, sg) / np.dot(sg, sg))
    return ratio ** (1.0 / (p.gamma - 2.0)), ratio


def fixed_point_residual(profile: SteadyProfile) -> float:
    """Relative sup residual ``|rho^gamma - P[rho]| / sup rho^gamma``."""
    if not np.any(profile.rho > 0):
        return 0.0
    pm = fixed_point_map(np.asarray(profile.rho), np.asarray(profile.grid), profile.params)
    rg = profile.rho_gamma
    return float(np.max(np.abs(rg - pm)) / np.max(rg))


def solve_steady(p: RieszParams, n: int = 400, tol: float = 1e-10, relax: float = 0.5,
                 max_iter: int = 5000, target_mass: float | None = 1.0) -> SteadyProfile:
    """Damped Picard iteration for the steady profile.

    Parameters
    ----------
    p : RieszParams
    n : int
        Half-grid count; the canonical grid is ``x_k = k/n``, ``|k| <= n``.
    tol : float
        Bound for both the iterate change and the relative fixed-point residual.
    relax : float
        Damping factor ``omega`` in ``rho <- (1-omega) rho + omega P[rho]^{1/gamma}``.
    target_mass : float or None
        Mass of the returned profile, obtained with the exact scaling symmetry.
        ``None`` keeps the canonical support ``[-1, 1]``.

    Returns
    -------
    SteadyProfile
    """
    if n < 32:
        raise ValueError("n must be at least 32")
    if not (0.0 < relax <= 1.0):
        raise ValueError("relax must lie in (0, 1]")
    if p.gamma >= 2.0:
        raise RegimeError("gamma >= 2 is outside the supported regime")
    grid = _uniform_grid(n, 1.0)
    shape = np.maximum(0.0, 1.0 - grid ** 2)

    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        pm = fixed_point_map(shape, grid, p)
        new = np.maximum(pm, 0.0) ** (1.0 / p.gamma)
        new /= new.max()
        change = float(np.max(np.abs(new - shape)))
        shape = (1.0 - relax) * shape + relax * new
        history.append(change)
        if change < tol:
            pm = fixed_point_map(shape, grid, p)
            _, ratio = _amplitude(shape, pm, p)
            res = float(np.max(np.abs(shape ** p.gamma - pm / ratio)))
            if res < tol:
                converged = True
                break
    if not converged:
        raise SteadyConvergenceError(
            f"no convergence after {max_iter} iterations (last change {history[-1]:.3e})",
            history)

    amp, _ = _amplitude(shape, fixed_point_map(shape, grid, p), p)
    rho = amp * shape
    rho[[0, -1]] = 0.0
    prof = SteadyProfile(grid=grid, rho=rho, radius=1.0, mass=_mass(rho, grid),
                         s=p.s, gamma=p.gamma, iterations=it, history=tuple(history))
    prof = replace(prof, residual=fixed_point_residual(prof))
    if target_mass is not None:
        prof = rescale_profile(prof, target_mass)
    return prof


def _mass(rho, grid) -> float:
    return float(np.trapezoid(rho, grid))


def scale_profile(profile: SteadyProfile, lam: float) -> SteadyProfile:
    """Apply ``rho_lam(x) = lam^{2s/(2-gamma)} rho(lam x)``; radius becomes ``R/lam``."""
    if profile.gamma >= 2.0:
        raise RegimeError("scaling exponent degenerates for gamma >= 2")
    if lam <= 0:
        raise ValueError("lam must be positive")
    amp = lam ** (2.0 * profile.s / (2.0 - profile.gamma))
    grid = np.asarray(profile.grid) / lam
    rho = amp * np.asarray(profile.rho)
    return replace(profile, grid=grid, rho=rho, radius=profile.radius / lam,
                   mass=_mass(rho, grid))


def rescale_profile(profile: SteadyProfile, target_mass: float) -> SteadyProfile:
    """Rescale to a prescribed mass; mass scales like ``lam^{2s/(2-gamma) - 1}``."""
    if not target_mass > 0:
        raise ValueError("target_mass must be positive")
    if profile.gamma >= 2.0:
        raise RegimeError("scaling exponent degenerates for gamma >= 2")
    expo = 2.0 * profile.s / (2.0 - profile.gamma) - 1.0
    lam = (target_mass / profile.mass) ** (1.0 / expo)
    return scale_profile(profile, lam)


def with_radius(profile: SteadyProfile, radius: float = 1.0) -> SteadyProfile:
    """Rescale so the support is ``[-radius, radius]``."""
    return scale_profile(profile, profile.radius / radius)


def steady_residual(profile: SteadyProfile, relative: bool = False, weight_power: float = 0.0) -> float:
    """Sup over interior nodes of ``|D_h(rho^gamma) + rho * Psi'|``.

    ``D_h`` is the centred difference and ``Psi'`` comes from
    :func:`potential_gradient_all`. With ``weight_power = q`` the residual is
    multiplied by ``rho^{-q}`` at nodes where ``rho > 0``. ``relative`` divides
    by ``sup rho^gamma``.
    """
    rho = np.asarray(profile.rho)
    if not np.any(rho > 0):
        return 0.0
    grid = np.asarray(profile.grid)
    h = grid[1] - grid[0]
    rg = rho ** profile.gamma
    g = potential_gradient_all(rho, grid, profile.params)
    res = (rg[2:] - rg[:-2]) / (2 * h) + rho[1:-1] * g[1:-1]
    if weight_power:
        inner = rho[1:-1]
        mask = inner > 0
        res = np.where(mask, np.abs(res) / np.where(mask, inner, 1.0) ** weight_power, 0.0)
    out = float(np.max(np.abs(res)))
    if relative:
        out /= float(rg.max())
    return out


def convolve_w(rho, grid, p: RieszParams) -> np.ndarray:
    """``(W * rho)(x_i)`` with the self-node singularity corrected.

    Trapezoid weights off the diagonal plus the zeta correction
    ``-2 zeta(1-2s) rho_i h^{2s} / k`` for the dropped cell.
    """
    rho = np.asarray(rho, dtype=float)
    n = grid.size
    h = grid[1] - grid[0]
    d = grid[:, None] - grid[None, :]
    np.fill_diagonal(d, 1.0)
    wm = np.abs(d) ** p.k / p.k
    np.fill_diagonal(wm, 0.0)
    wts = np.full(n, h)
    wts[0] = wts[-1] = 0.5 * h
    out = (wm * (wts * rho)[None, :]).sum(axis=1)
    out += -2.0 * special.zeta(1.0 - 2.0 * p.s) * rho * h ** (2.0 * p.s) / p.k
    return out


def free_energy(rho, grid, p: RieszParams) -> float:
    """``int rho^gamma/(gamma-1) + rho (W * rho)/2`` by the trapezoid rule."""
    rho = np.asarray(rho, dtype=float)
    dens = rho ** p.gamma / (p.gamma - 1.0) + 0.5 * rho * convolve_w(rho, grid, p)
    return float(np.trapezoid(dens, grid))


def weighted_l2(profile: SteadyProfile, f, power: float, cells: bool = False) -> float:
    """``( sum h rho^power f^2 )^{1/2}`` over nodes (or cells ``[x_k, x_{k+1}]``).

    With ``cells=True``, ``f`` has one value per cell and the weight uses the
    left node of each cell.
    """
    rho = np.asarray(profile.rho)
    f = np.asarray(f, dtype=float)
    w = rho[:-1] if cells else rho
    return float(np.sqrt(profile.h * np.sum(w ** power * f ** 2)))


def boundary_pinch(profile: SteadyProfile, fraction: float = 0.1, power: float = 1.0):
    """Constants ``c1 <= rho^power / (R - |x|) <= c2`` over the outer fraction.

    Returns ``(c1, c2)`` computed on the right half, on nodes strictly inside.
    """
    x = np.asarray(profile.grid)
    r = profile.radius
    mask = (x >= (1.0 - fraction) * r) & (x < r)
    q = np.asarray(profile.rho)[mask] ** power / (r - x[mask])
    return float(q.min()), float(q.max())


def vacuum_slope(profile: SteadyProfile, window: tuple = (0.9, 0.975)) -> float:
    """One-sided slope of ``rho^{gamma-1}`` at the right boundary.

    Quadratic least squares in ``x - R`` over nodes with ``window[0] R <= x <=
    window[1] R``. The last few nodes are left out because the trapezoid
    tail integral is least accurate there.
    """
    x = np.asarray(profile.grid)
    c = np.asarray(profile.rho) ** (profile.gamma - 1.0)
    r = profile.radius
    mask = (x >= window[0] * r) & (x <= window[1] * r)
    if mask.sum() < 4:
        raise ValueError("window holds fewer than 4 nodes")
    coef = np.polyfit(x[mask] - r, c[mask], 2)
    return float(coef[1])
