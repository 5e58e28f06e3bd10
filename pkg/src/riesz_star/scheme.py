"""Lagrangian finite-difference scheme for small perturbations of the steady star.

Nodes ``x_k = k h`` with ``h = R/N`` and ``|k| <= N``. The unknowns are the
particle positions ``eta_k`` and velocities ``v_k``; only ``k = 0..N`` is
stored, negative indices follow from oddness. Outside the grid the map is
continued affinely with unit slope, so every sum over ``j`` in the nonlocal
force runs over all integers; the parts beyond the grid are summed exactly
with the Hurwitz zeta function.

Momentum balance at an interior node::

    rho_k dv_k/dt + P_k + Phi_k = V_k

with pressure ``P_k``, nonlocal force ``Phi_k`` and viscous term ``V_k``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, special

from .kernel import RieszParams
from .steady import SteadyProfile, with_radius


class GuardTrip(RuntimeError):
    """Stretch left the admissible band or the state became non-finite."""

    def __init__(self, msg, t=None, state=None):
        super().__init__(msg)
        self.t = t
        self.state = state


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    """Discretisation and run settings.

    ``dt = None`` selects ``0.25 h`` for ``imex_be`` and the stability
    heuristic ``rk4_safety * h^2 * min rho`` for ``explicit_rk4``.
    """

    n: int = 200
    t_end: float = 50.0
    dt: float | None = None
    dt_policy: str = "fixed"
    integrator: str = "imex_be"
    snapshot_every: float = 0.25
    eps0: float = 0.01
    pairing: str = "straddle"
    theta_rule: str = "sum"
    guard: tuple = (0.25, 4.0)
    rk4_safety: float = 0.5
    eps0_cap: float = 0.05

    def __post_init__(self):
        if self.n < 32:
            raise ConfigError("n must be at least 32")
        if self.integrator not in ("imex_be", "explicit_rk4"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.dt_policy not in ("fixed", "adaptive"):
            raise ConfigError(f"unknown dt policy {self.dt_policy!r}")
        if self.pairing not in ("straddle", "literal"):
            raise ConfigError(f"unknown pressure pairing {self.pairing!r}")
        if self.theta_rule not in ("sum", "corrected"):
            raise ConfigError(f"unknown theta rule {self.theta_rule!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be nonnegative")
        if not self.snapshot_every > 0:
            raise ConfigError("snapshot_every must be positive")
        object.__setattr__(self, "guard", tuple(float(g) for g in self.guard))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["guard"] = list(self.guard)
        return d


@dataclass(frozen=True, eq=False)
class GridState:
    """Positions and velocities on the right half ``k = 0..N``."""

    t: float
    eta: np.ndarray
    v: np.ndarray
    h: float

    def __post_init__(self):
        for name in ("eta", "v"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.eta.size - 1

    def full_eta(self) -> np.ndarray:
        return np.concatenate([-self.eta[:0:-1], self.eta])

    def full_v(self) -> np.ndarray:
        return np.concatenate([-self.v[:0:-1], self.v])

    def stretch(self) -> np.ndarray:
        """``(eta_c - eta_{c-1})/h`` for cells ``c = 1..N``."""
        return np.diff(self.eta) / self.h

    def extended_eta(self, k) -> np.ndarray:
        """``eta~_k`` for arbitrary integer ``k`` (odd inside, affine outside)."""
        k = np.asarray(k)
        n, h = self.n, self.h
        r = n * h
        out = np.empty(k.shape, dtype=float)
        inside = np.abs(k) <= n
        kin = k[inside]
        out[inside] = np.sign(kin) * self.eta[np.abs(kin)]
        hi = k > n
        out[hi] = self.eta[n] - r + k[hi] * h
        lo = k < -n
        out[lo] = -self.eta[n] + r + k[lo] * h
        return out


@dataclass
class Forces:
    """Everything evaluated at one state; arrays indexed by node ``k = 0..N``."""

    pressure: np.ndarray
    phi: np.ndarray
    viscous: np.ndarray
    accel: np.ndarray
    kinetic: float
    pressure_energy: float
    pressure_energy_abs: float
    interaction_abs: float
    interaction_rel: float

    @property
    def energy(self) -> float:
        """Relative physical energy (zero at the steady state)."""
        return self.kinetic + self.pressure_energy + self.interaction_rel

    @property
    def energy_abs(self) -> float:
        """Physical energy with absolute pressure and interaction parts."""
        return self.kinetic + self.pressure_energy_abs + self.interaction_abs


def scheme_profile(profile: SteadyProfile, n: int) -> SteadyProfile:
    """Profile on the unit support ``[-1, 1]`` with half-grid count ``n``.

    The profile is mapped to unit radius with the exact scaling symmetry and
    subsampled when its half-grid count is a multiple of ``n``.
    """
    prof = profile if profile.radius == 1.0 else with_radius(profile, 1.0)
    if prof.n == n:
        return prof
    if prof.n % n:
        raise ConfigError(f"profile half-grid {prof.n} is not a multiple of n = {n}")
    step = prof.n // n
    grid = np.asarray(prof.grid)[::step]
    rho = np.asarray(prof.rho)[::step]
    return replace(prof, grid=grid, rho=rho, mass=float(np.trapezoid(rho, grid)))


def _pair_sums(eta_rows, eta_full, dtil, rho_full, h, p: RieszParams, n: int,
               with_energy: bool):
    """Row sums over ``j`` for target nodes ``k = 0..len(eta_rows)-1``.

    Returns ``A_k = sum_j h W'(eta_k - eta_j) rho_j``,
    ``S_k = sum_{j in Z} W'(eta_k - eta~_j)(eta~_{j+1} - eta~_j)`` and, on
    request, ``sum_j rho_j W(eta_k - eta_j)``.
    """
    m = eta_rows.size
    d = eta_rows[:, None] - eta_full[None, :]
    self_idx = (np.arange(m), np.arange(m) + n)
    d[self_idx] = 1.0
    a = np.abs(d)
    pw = a ** (p.k - 1.0)
    wp = np.copysign(pw, d)
    wp[self_idx] = 0.0
    amat = (wp * rho_full[None, :]).sum(axis=1) * h
    smat = (wp * dtil[None, :]).sum(axis=1)
    # exact sums over the affine continuation beyond +-N
    etan = eta_full[-1]
    q_right = 1.0 + (etan - eta_rows) / h
    q_left = 1.0 + (etan + eta_rows) / h
    z = 2.0 - 2.0 * p.s
    smat += h ** (p.k) * (special.zeta(z, q_left) - special.zeta(z, q_right))
    wsum = None
    if with_energy:
        wmat = a * pw / p.k
        wmat[self_idx] = 0.0
        wsum = (wmat * rho_full[None, :]).sum(axis=1)
    return amat, smat, wsum


class LagrangianScheme:
    """Semi-discrete system and its time integrators.

    Parameters
    ----------
    profile : SteadyProfile
        Any steady profile; it is moved to unit radius and subsampled to
        ``config.n``.
    config : SchemeConfig
    """

    def __init__(self, profile: SteadyProfile, config: SchemeConfig):
        self.config = config
        self.profile = scheme_profile(profile, config.n)
        self.params = RieszParams(self.profile.s, self.profile.gamma)
        self.n = config.n
        self.h = self.profile.radius / self.n
        self.x = np.arange(self.n + 1) * self.h
        self.rho_full = np.asarray(self.profile.rho, dtype=float).copy()
        self.rho = self.rho_full[self.n:].copy()

        n, h, p = self.n, self.h, self.params
        x_full = np.arange(-n, n + 1) * h
        dtil = np.full(2 * n + 1, h)
        a0, s0, w0 = _pair_sums(self.x[:n].copy(), x_full, dtil, self.rho_full, h, p, n, True)
        self._a0, self._s0 = a0, s0
        self.theta_full = theta_weights(self.profile, corrected=config.theta_rule == "corrected")
        self.theta = self.theta_full[n:].copy()
        # theta_{k-1} - theta_k: gradient of the linear part of the pressure energy
        self._dtheta = self.theta_full[n - 1:2 * n] - self.theta_full[n:2 * n + 1]
        # pressure weight of cell c = [c-1, c], c = 1..N
        if config.pairing == "straddle":
            self.cell_weight = self.theta_full[n:2 * n].copy()
        else:
            self.cell_weight = self.theta_full[n + 1:].copy()
        self._interaction0 = 0.5 * h * h * (self.rho[0] * w0[0] * 1.0
                                            + 2.0 * np.sum(self.rho[1:n] * w0[1:n]))
        self._w0_rows = w0

    # ------------------------------------------------------------------ states
    def identity_state(self, t: float = 0.0) -> GridState:
        return GridState(t=t, eta=self.x.copy(), v=np.zeros(self.n + 1), h=self.h)

    def check_state(self, state: GridState) -> None:
        if not (np.all(np.isfinite(state.eta)) and np.all(np.isfinite(state.v))):
            raise GuardTrip("non-finite state", state.t, state)
        st = state.stretch()
        lo, hi = self.config.guard
        if st.min() < lo or st.max() > hi:
            raise GuardTrip(
                f"stretch left [{lo}, {hi}] at t = {state.t:.6g} "
                f"(min {st.min():.4g}, max {st.max():.4g})", state.t, state)

    # ------------------------------------------------------------------ forces
    def phi(self, state: GridState) -> np.ndarray:
        return self.forces(state, with_energy=False).phi

    def forces(self, state: GridState, with_energy: bool = True) -> Forces:
        n, h, p = self.n, self.h, self.params
        rho = self.rho
        eta, v = np.asarray(state.eta), np.asarray(state.v)
        if np.any(np.diff(eta) <= 0.0):
            raise GuardTrip("positions are not strictly increasing", state.t, state)
        eta_full = np.concatenate([-eta[:0:-1], eta])
        dtil = np.empty(2 * n + 1)
        dtil[:-1] = np.diff(eta_full)
        dtil[-1] = h
        amat, smat, wsum = _pair_sums(eta[:n].copy(), eta_full, dtil, self.rho_full,
                                      h, p, n, with_energy)

        dc = np.diff(eta) / h                      # stretch of cells 1..N
        phi = np.zeros(n + 1)
        rk = rho[1:n]
        phi[1:n] = (-rk * (self._a0[1:] - rk * self._s0[1:])
                    + rk * amat[1:] - rk * rk * smat[1:] / dc[1:])

        cw = self.cell_weight
        flux = cw * (dc ** (-p.gamma) - 1.0)       # per cell
        pressure = np.zeros(n + 1)
        pressure[1:n] = (flux[1:] - flux[:-1]) / h

        viscous = self.viscous(eta, v)
        accel = np.zeros(n + 1)
        accel[1:n] = (viscous[1:n] - pressure[1:n] - phi[1:n]) / rk
        accel[n] = accel[n - 1]

        kin = pres = pres_abs = i_abs = i_rel = float("nan")
        if with_energy:
            g = p.gamma
            kin = 0.5 * h * (rho[0] * v[0] ** 2 + 2.0 * np.sum(rho[1:] * v[1:] ** 2))
            pres = 2.0 * h * np.sum(cw * (dc ** (1.0 - g) + (g - 1.0) * dc - g)) / (g - 1.0)
            pres_abs = 2.0 * h * np.sum(cw * dc ** (1.0 - g)) / (g - 1.0)
            i_abs = 0.5 * h * h * (rho[0] * wsum[0] + 2.0 * np.sum(rho[1:n] * wsum[1:]))
            w = eta - self.x
            lin = 2.0 * np.sum(self._dtheta[1:n] * w[1:n])
            i_rel = i_abs - self._interaction0 - lin
        return Forces(pressure=pressure, phi=phi, viscous=viscous, accel=accel,
                      kinetic=kin, pressure_energy=pres, pressure_energy_abs=pres_abs,
                      interaction_abs=i_abs, interaction_rel=i_rel)

    def viscous(self, eta, v) -> np.ndarray:
        """``(1/h)[(v_{k+1}-v_k)/(eta_{k+1}-eta_k) - (v_k-v_{k-1})/(eta_k-eta_{k-1})]``."""
        n, h = self.n, self.h
        q = np.diff(v) / np.diff(eta)              # cells 1..N, q_N = 0 by closure
        out = np.zeros(n + 1)
        out[1:n] = (q[1:] - q[:-1]) / h
        return out

    def rhs(self, state: GridState):
        """Time derivatives ``(d eta/dt, dv/dt)`` on ``k = 0..N``."""
        f = self.forces(state, with_energy=False)
        return np.asarray(state.v).copy(), f.accel

    # ----------------------------------------------------------------- steppers
    def _close(self, t, eta, v) -> GridState:
        eta = eta.copy()
        v = v.copy()
        eta[0] = 0.0
        v[0] = 0.0
        eta[-1] = eta[-2] + self.h
        v[-1] = v[-2]
        return GridState(t=t, eta=eta, v=v, h=self.h)

    def step_imex(self, state: GridState, dt: float, forces: Forces | None = None):
        """Backward Euler in the viscous term, forward Euler in pressure and Phi.

        Returns the new state and the forces used (evaluated at ``state``).
        """
        n, h = self.n, self.h
        if forces is None:
            forces = self.forces(state, with_energy=False)
        eta, v = np.asarray(state.eta), np.asarray(state.v)
        cell = np.diff(eta)                        # cells 1..N
        cond = 1.0 / (h * cell)                    # viscous coupling per cell
        rk = self.rho[1:n]
        m = n - 1
        diag = rk / dt + cond[:-1] + cond[1:]
        diag[-1] = rk[-1] / dt + cond[-2]          # v_N = v_{N-1} closes the last cell
        ab = np.zeros((3, m))
        ab[0, 1:] = -cond[1:-1]
        ab[1] = diag
        ab[2, :-1] = -cond[1:-1]
        b = rk * v[1:n] / dt - forces.pressure[1:n] - forces.phi[1:n]
        try:
            vin = linalg.solve_banded((1, 1), ab, b, check_finite=True)
        except (linalg.LinAlgError, ValueError) as exc:
            raise GuardTrip(f"tridiagonal solve failed at t = {state.t:.6g}: {exc}",
                            state.t, state) from exc
        v_new = np.zeros(n + 1)
        v_new[1:n] = vin
        eta_new = eta.copy()
        eta_new[1:n] = eta[1:n] + dt * vin
        return self._close(state.t + dt, eta_new, v_new), forces

    def step_euler(self, state: GridState, dt: float) -> GridState:
        de, dv = self.rhs(state)
        return self._close(state.t + dt, np.asarray(state.eta) + dt * de,
                           np.asarray(state.v) + dt * dv)

    def step_rk4(self, state: GridState, dt: float) -> GridState:
        def f(st):
            return self.rhs(st)

        def shift(st, de, dv, c):
            return self._close(st.t + c, np.asarray(st.eta) + c * de,
                               np.asarray(st.v) + c * dv)

        k1 = f(state)
        s2 = shift(state, *k1, 0.5 * dt)
        k2 = f(s2)
        s3 = shift(state, *k2, 0.5 * dt)
        k3 = f(s3)
        s4 = shift(state, *k3, dt)
        k4 = f(s4)
        de = (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
        dv = (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
        return shift(state, de, dv, dt)

    def step(self, state: GridState, dt: float) -> GridState:
        if not dt > 0:
            raise ValueError("dt must be positive")
        if self.config.integrator == "imex_be":
            new, _ = self.step_imex(state, dt)
        else:
            new = self.step_rk4(state, dt)
        self.check_state(new)
        return new

    def default_dt(self) -> float:
        if self.config.dt is not None:
            return float(self.config.dt)
        if self.config.integrator == "imex_be":
            return 0.25 * self.h
        rmin = float(self.rho[1:self.n].min())
        return self.config.rk4_safety * self.h ** 2 * rmin

    # ------------------------------------------------------------- reconstruction
    def eulerian(self, state: GridState):
        """Eulerian samples on the full grid.

        Returns ``(xi, rho_cell, u, a)`` where ``rho_cell[k]`` belongs to the
        cell ``[eta_k, eta_{k+1}]`` for ``k = -N..N-1`` and the boundary cell
        value is 0.
        """
        eta = state.full_eta()
        cells = np.diff(eta)
        if np.any(cells <= 0):
            raise GuardTrip("monotonicity violated", state.t, state)
        rho_cell = np.zeros(eta.size)
        rho_cell[:-1] = self.rho_full[:-1] * self.h / cells
        return eta, rho_cell, state.full_v(), float(state.eta[-1])


# ---------------------------------------------------------------------- helpers
def theta_weights(profile: SteadyProfile, j_range: str = "integers",
                  corrected: bool = False) -> np.ndarray:
    """``theta_k = sum_{i>=k+1} sum_{j != i} W'(x_i - x_j) rho_i (rho_j - rho_i) h^2``.

    Discrete surrogate for ``rho^gamma(x_k)``, returned for ``k = -N..N`` on
    the profile's own grid.

    Parameters
    ----------
    j_range : {"integers", "grid"}
        Inner index over all integers (density zero outside the grid, summed
        exactly with the Hurwitz zeta function) or over grid nodes only.
        The two differ: outside the grid each term is ``-rho_i W'(x_i - x_j)``.
    corrected : bool
        Add the leading-order correction ``2 zeta(1-2s) rho'_i h^{2s}`` for
        the omitted self cell to the inner sum. Not part of the defining sum;
        roughly halves the error against ``rho^gamma``.
    """
    if j_range not in ("integers", "grid"):
        raise ValueError(f"unknown j range {j_range!r}")
    n = profile.n
    h = profile.h
    p = profile.params
    rho_full = np.asarray(profile.rho, dtype=float)
    x = np.arange(n + 1) * h
    x_full = np.arange(-n, n + 1) * h
    dtil = np.full(2 * n + 1, h)
    a0, s0, _ = _pair_sums(x[:n].copy(), x_full, dtil, rho_full, h, p, n, False)
    if j_range == "grid":
        # drop the exterior zeta tails again
        q_right = 1.0 + (x_full[-1] - x[:n]) / h
        q_left = 1.0 + (x_full[-1] + x[:n]) / h
        z = 2.0 - 2.0 * p.s
        s0 = s0 - h ** p.k * (special.zeta(z, q_left) - special.zeta(z, q_right))
    g = np.zeros(n + 1)
    g[:n] = a0 - rho_full[n:2 * n] * s0
    if corrected:
        slope = np.gradient(rho_full, h)[n:]
        g[1:n] += 2.0 * special.zeta(1.0 - 2.0 * p.s) * slope[1:n] * h ** (2.0 * p.s)
    g_full = np.concatenate([-g[:0:-1], g])
    contrib = h * rho_full * g_full
    suffix = np.cumsum(contrib[::-1])[::-1]
    return np.concatenate([suffix[1:], [0.0]])


def phi_discrete(state: GridState, profile: SteadyProfile, config: SchemeConfig | None = None):
    cfg = config or SchemeConfig(n=state.n)
    return LagrangianScheme(profile, cfg).phi(state)


def initial_data(scheme: LagrangianScheme, eps0: float, mode: str = "polynomial_bump",
                 w0: Callable | None = None, w1: Callable | None = None,
                 tol: float = 1e-12) -> GridState:
    """Perturbed state ``eta = x + w0(x)``, ``v = w1(x)``.

    The default bump is ``w0 = eps0 x (1 - x^2)^2`` (in units of the support
    radius) and ``w1 = 0``. Custom data must be odd and have vanishing slope
    at the boundary.
    """
    if abs(eps0) > scheme.config.eps0_cap:
        raise ConfigError(f"|eps0| = {abs(eps0)} exceeds the cap {scheme.config.eps0_cap}")
    r = scheme.profile.radius
    x_full = np.arange(-scheme.n, scheme.n + 1) * scheme.h
    if mode == "polynomial_bump":
        def w0(z):
            return eps0 * z * (1.0 - (z / r) ** 2) ** 2

        def w1(z):
            return np.zeros_like(z)
    elif mode == "custom":
        if w0 is None:
            raise ConfigError("custom mode needs w0")
        if w1 is None:
            def w1(z):
                return np.zeros_like(z)
    else:
        raise ConfigError(f"unknown initial-data mode {mode!r}")
    a = np.asarray(w0(x_full), dtype=float)
    b = np.asarray(w1(x_full), dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a + a[::-1])) > tol * scale or np.max(np.abs(b + b[::-1])) > tol * max(1.0, np.max(np.abs(b))):
        raise ConfigError("initial data must be odd")
    xe = np.array([r * (1 - 1e-6), r])
    slope = float(np.diff(np.asarray(w0(xe), dtype=float))[0] / (xe[1] - xe[0]))
    if abs(slope) > 1e-4 * max(1.0, abs(eps0)) + 1e-8:
        raise ConfigError("initial data must have vanishing slope at the boundary")
    eta = scheme.x + a[scheme.n:]
    v = b[scheme.n:].copy()
    state = scheme._close(0.0, eta, v)
    scheme.check_state(state)
    return state


# ------------------------------------------------------------------- simulate
@dataclass
class Snapshot:
    state: GridState
    forces: Forces


@dataclass
class Trajectory:
    config: SchemeConfig
    profile: SteadyProfile
    snapshots: list = field(default_factory=list)
    step_times: list = field(default_factory=list)
    step_energy: list = field(default_factory=list)
    step_energy_abs: list = field(default_factory=list)
    status: str = "running"
    guard_time: float | None = None
    message: str = ""
    observers: list = field(default_factory=list)
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.state.t for s in self.snapshots])

    @property
    def last_state(self) -> GridState:
        return self.snapshots[-1].state

    @property
    def completed(self) -> bool:
        return self.status == "completed"


def simulate(config: SchemeConfig, profile: SteadyProfile,
             initial: GridState | None = None,
             observers: Sequence = (),
             scheme: LagrangianScheme | None = None,
             record_step_energy: bool = True) -> Trajectory:
    """Integrate to ``config.t_end`` or until the guard fires.

    Observers receive ``observer.update(old_state, forces_at_old, new_state, dt)``
    after every accepted step, and ``observer.start(state, forces)`` once.
    A guard trip ends the run with ``status = "guard_tripped"``; the last
    good state is kept as the final snapshot.
    """
    sch = scheme or LagrangianScheme(profile, config)
    state = initial if initial is not None else initial_data(sch, config.eps0)
    traj = Trajectory(config=config, profile=sch.profile, observers=list(observers))
    dt = sch.default_dt()
    dt_min = dt / 1024.0
    t_end = float(config.t_end)
    every = float(config.snapshot_every)

    f0 = sch.forces(state)
    traj.snapshots.append(Snapshot(state, f0))
    for ob in traj.observers:
        ob.start(state, f0)
    if record_step_energy:
        traj.step_times.append(state.t)
        traj.step_energy.append(f0.energy)
        traj.step_energy_abs.append(f0.energy_abs)

    next_snap = every
    forces = f0
    tiny = 1e-9 * dt
    try:
        while state.t < t_end - tiny:
            h_step = dt
            if t_end - state.t <= dt * (1.0 + 1e-6):
                h_step = t_end - state.t
            if config.integrator == "imex_be":
                new, used = sch.step_imex(state, h_step, forces)
                if config.dt_policy == "adaptive":
                    vmax = float(np.max(np.abs(state.v)))
                    while (np.max(np.abs(np.asarray(new.v) - np.asarray(state.v)))
                           > 0.1 * vmax + 1e-8 and h_step > dt_min):
                        dt *= 0.5
                        h_step = min(dt, t_end - state.t)
                        new, used = sch.step_imex(state, h_step, forces)
            else:
                used = forces
                new = sch.step_rk4(state, h_step)
            sch.check_state(new)
            traj.steps += 1
            # forces at the new state serve the next step and the records
            need_energy = record_step_energy or new.t >= next_snap - tiny or new.t >= t_end - tiny
            new_forces = sch.forces(new, with_energy=need_energy)
            for ob in traj.observers:
                ob.update(state, used, new, h_step)
            state, forces = new, new_forces
            if record_step_energy:
                traj.step_times.append(state.t)
                traj.step_energy.append(forces.energy)
                traj.step_energy_abs.append(forces.energy_abs)
            if state.t >= next_snap - tiny or state.t >= t_end - tiny:
                traj.snapshots.append(Snapshot(state, forces))
                while next_snap <= state.t + tiny:
                    next_snap += every
        traj.status = "completed"
    except GuardTrip as exc:
        traj.status = "guard_tripped"
        traj.guard_time = float(exc.t if exc.t is not None else state.t)
        traj.message = str(exc)
        if traj.snapshots[-1].state is not state:
            traj.snapshots.append(Snapshot(state, sch.forces(state)))
    return traj


def eulerian_reconstruct(state: GridState, profile: SteadyProfile):
    """Eulerian density, velocity and boundary position of a state."""
    cfg = SchemeConfig(n=state.n)
    return LagrangianScheme(profile, cfg).eulerian(state)
