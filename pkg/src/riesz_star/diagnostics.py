"""Energies, weighted norms, decay fits and consistency checks along trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scheme import Forces, GridState, LagrangianScheme, Trajectory

NORM_NAMES = ("stretch", "stretch_rate", "velocity", "accel")


class DegenerateFitError(ValueError):
    """Too few samples, non-positive norms, or a series stuck at round-off."""


@dataclass(frozen=True)
class EnergyReport:
    """Discrete energy ``E_N`` and the norms that enter the decay estimates.

    ``e_n = sup_term + w2_second_diff + w2_accel``. ``w2_second_diff_alt``
    is the same second-difference term with the weight written as
    ``(rho^{gamma-1/2} f)^2``; it agrees with ``w2_second_diff`` up to
    round-off and is reported for cross-checking.
    """

    t: float
    e_n: float
    sup_term: float
    sup_stretch_dev: float
    sup_dv: float
    w2_second_diff: float
    w2_second_diff_alt: float
    w2_accel: float
    decay_norms: dict = field(default_factory=dict)
    jacobian_minmax: tuple = (1.0, 1.0)

    CSV_COLUMNS = ("t", "e_n", "sup_term", "sup_stretch_dev", "sup_dv",
                   "w2_second_diff", "w2_accel", "norm_stretch", "norm_stretch_rate",
                   "norm_velocity", "norm_accel", "stretch_min", "stretch_max")

    def row(self) -> tuple:
        dn = self.decay_norms
        return (self.t, self.e_n, self.sup_term, self.sup_stretch_dev, self.sup_dv,
                self.w2_second_diff, self.w2_accel, dn["stretch"], dn["stretch_rate"],
                dn["velocity"], dn["accel"], self.jacobian_minmax[0], self.jacobian_minmax[1])


def energy_discrete(state: GridState, accel, rho, gamma: float) -> EnergyReport:
    """Evaluate ``E_N`` on the full grid ``k = -N..N`` from the half-grid state.

    Parameters
    ----------
    state : GridState
    accel : array_like
        ``dv_k/dt`` for ``k = 0..N`` (normally ``Forces.accel``).
    rho : array_like
        Steady density at ``k = 0..N``.
    gamma : float
    """
    h = state.h
    n = state.n
    eta = np.asarray(state.eta)
    v = np.asarray(state.v)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(accel, dtype=float)
    if rho.size != n + 1 or a.size != n + 1:
        raise ValueError("rho and accel must have N + 1 entries")

    st = np.diff(eta) / h                          # cells 1..N (mirror image on the left)
    dv = np.diff(v) / h
    dev = st - 1.0
    sup_term = float(np.max(dev * dev + dv * dv))
    sec = (st[1:] - st[:-1]) / h                   # nodes 1..N-1; node 0 vanishes by oddness
    rk = rho[1:n]
    w2 = 2.0 * h * float(np.sum(rk ** (2.0 * gamma - 1.0) * sec * sec))
    w2_alt = 2.0 * h * float(np.sum((rk ** (gamma - 0.5) * sec) ** 2))
    wa = h * float(rho[0] * a[0] ** 2 + 2.0 * np.sum(rho[1:] * a[1:] ** 2))

    cw = 0.5 * (rho[:-1] ** gamma + rho[1:] ** gamma)  # cell weight for rho^gamma
    norms = {
        "stretch": float(np.sqrt(2.0 * h * np.sum(cw * dev * dev))),
        "stretch_rate": float(np.sqrt(2.0 * h * np.sum(cw * dv * dv))),
        "velocity": float(np.sqrt(h * (rho[0] * v[0] ** 2 + 2.0 * np.sum(rho[1:] * v[1:] ** 2)))),
        "accel": float(np.sqrt(wa)),
    }
    return EnergyReport(
        t=float(state.t), e_n=sup_term + w2 + wa, sup_term=sup_term,
        sup_stretch_dev=float(np.max(np.abs(dev))), sup_dv=float(np.max(np.abs(dv))),
        w2_second_diff=w2, w2_second_diff_alt=w2_alt, w2_accel=wa,
        decay_norms=norms, jacobian_minmax=(float(st.min()), float(st.max())))


def energy_naive(state: GridState, accel, rho, gamma: float) -> float:
    """Reference ``E_N`` by explicit loops over the mirrored full grid."""
    n, h = state.n, state.h
    eta = state.full_eta()
    v = state.full_v()
    r = np.concatenate([np.asarray(rho)[:0:-1], np.asarray(rho)])
    a_half = np.asarray(accel)
    a = np.concatenate([-a_half[:0:-1], a_half])
    best = 0.0
    for i in range(1, 2 * n + 1):
        d1 = (eta[i] - eta[i - 1]) / h - 1.0
        d2 = (v[i] - v[i - 1]) / h
        best = max(best, d1 * d1 + d2 * d2)
    second = 0.0
    for i in range(1, 2 * n):
        q = ((eta[i + 1] - eta[i]) / h - (eta[i] - eta[i - 1]) / h) / h
        second += h * r[i] ** (2 * gamma - 1) * q * q
    acc = 0.0
    for i in range(2 * n + 1):
        acc += h * r[i] * a[i] * a[i]
    return best + second + acc


def trajectory_reports(traj: Trajectory) -> list:
    rho = np.asarray(traj.profile.rho)[traj.profile.n:]
    g = traj.profile.gamma
    return [energy_discrete(s.state, s.forces.accel, rho, g) for s in traj.snapshots]


@dataclass(frozen=True)
class DecayFit:
    slope: float
    r2: float
    samples: int
    window: tuple


def decay_fit(t, norm, window=(5.0, None), min_samples: int = 10,
              floor: float = 1e-14) -> DecayFit:
    """Least-squares slope of ``log(norm)`` against ``log(1 + t)`` on a window."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(norm, dtype=float)
    lo = window[0] if window[0] is not None else -np.inf
    hi = window[1] if window[1] is not None else np.inf
    mask = (t >= lo) & (t <= hi)
    t, y = t[mask], y[mask]
    if t.size < min_samples:
        raise DegenerateFitError(f"{t.size} samples in window, need {min_samples}")
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
        raise DegenerateFitError("norms must be positive and finite")
    if np.all(y <= floor):
        raise DegenerateFitError("all norms at round-off floor")
    lx = np.log1p(t)
    ly = np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss
    return DecayFit(float(slope), float(r2), int(t.size), (float(t[0]), float(t[-1])))


class RepresentationTracker:
    """Stretch rebuilt from the exponential representation of ``log d_x eta``.

    Summing the momentum equation from a cell to the boundary gives, for
    ``u = D^gamma`` with ``D`` the stretch of cell ``[k-1, k]``,

        du/dt = -gamma (dH1/dt + theta + H2) u + gamma theta,

    with ``H1 = sum_{j>=k} h rho_j v_j``, ``H2 = sum_{j>=k} h Phi_j`` and
    ``theta`` the pressure weight of the cell. Its solution is the
    integrating-factor formula

        u(t) = e^{-gamma I(t)} u(0) + gamma theta int_0^t e^{-gamma (I(t) - I(tau))} dtau,
        I(t) = H1(t) - H1(0) + int_0^t (theta + H2) dtau.

    The tracker integrates this per step with the trapezoid rule for the
    ``dtau`` integral and compares with the measured stretch at snapshots.
    """

    def __init__(self, scheme: LagrangianScheme, record_every: float | None = None):
        self.scheme = scheme
        self.theta = scheme.cell_weight[:-1]        # cells 1..N-1
        self.gamma = scheme.params.gamma
        self.record_every = record_every if record_every is not None else scheme.config.snapshot_every
        self.times: list = []
        self.deviation: list = []
        self.u = None
        self._next = 0.0

    def _h1(self, state):
        c = self.scheme.h * self.scheme.rho * np.asarray(state.v)
        return np.cumsum(c[::-1])[::-1][1:-1]       # sums over j >= k for k = 1..N-1

    def _h2(self, forces: Forces):
        c = self.scheme.h * forces.phi
        return np.cumsum(c[::-1])[::-1][1:-1]

    def _record(self, state):
        meas = state.stretch()[:-1]
        rec = self.u ** (1.0 / self.gamma)
        self.times.append(float(state.t))
        self.deviation.append(float(np.max(np.abs(rec / meas - 1.0))))

    def start(self, state: GridState, forces: Forces) -> None:
        self.u = state.stretch()[:-1] ** self.gamma
        self._record(state)
        self._next = self.record_every

    def update(self, old: GridState, forces_old: Forces, new: GridState, dt: float) -> None:
        g = self.gamma
        di = (self._h1(new) - self._h1(old)) + dt * (self.theta + self._h2(forces_old))
        e = np.exp(-g * di)
        self.u = e * self.u + g * self.theta * dt * 0.5 * (e + 1.0)
        if new.t >= self._next - 1e-9 * dt:
            self._record(new)
            while self._next <= new.t + 1e-9 * dt:
                self._next += self.record_every

    @property
    def max_deviation(self) -> float:
        return max(self.deviation) if self.deviation else 0.0


def jacobian_representation_check(traj: Trajectory, scheme: LagrangianScheme | None = None) -> float:
    """Sup relative deviation between represented and measured stretch.

    Uses the :class:`RepresentationTracker` attached to the run when present.
    Otherwise the time integrals are rebuilt from the stored snapshots with the
    trapezoid rule, which is accurate only when snapshots are dense compared
    with the relaxation time ``1 / (gamma theta)``.
    """
    for ob in traj.observers:
        if isinstance(ob, RepresentationTracker):
            return ob.max_deviation
    sch = scheme or LagrangianScheme(traj.profile, traj.config)
    snaps = traj.snapshots
    if len(snaps) < 2:
        return 0.0
    tr = RepresentationTracker(sch, record_every=0.0)
    tr.start(snaps[0].state, snaps[0].forces)
    g = tr.gamma
    for prev, cur in zip(snaps[:-1], snaps[1:]):
        dt = cur.state.t - prev.state.t
        h2 = 0.5 * (tr._h2(prev.forces) + tr._h2(cur.forces))
        di = (tr._h1(cur.state) - tr._h1(prev.state)) + dt * (tr.theta + h2)
        e = np.exp(-g * di)
        tr.u = e * tr.u + g * tr.theta * dt * 0.5 * (e + 1.0)
        tr._record(cur.state)
    return tr.max_deviation


@dataclass(frozen=True)
class BoundaryTrack:
    t: np.ndarray
    a: np.ndarray
    v_boundary: np.ndarray
    max_speed_mismatch: float


class BoundaryObserver:
    """Per-step record of ``a(t) = eta_N`` and ``v_N``."""

    def __init__(self):
        self.t: list = []
        self.a: list = []
        self.v: list = []

    def start(self, state, forces):
        self._push(state)

    def update(self, old, forces_old, new, dt):
        self._push(new)

    def _push(self, st):
        self.t.append(float(st.t))
        self.a.append(float(st.eta[-1]))
        self.v.append(float(st.v[-1]))


def boundary_track(source) -> BoundaryTrack:
    """Boundary position series and the speed mismatch ``|da/dt - v_N|``.

    ``source`` is a :class:`BoundaryObserver` (per-step data) or a
    :class:`Trajectory` (snapshot data). The difference quotient over each
    interval is compared with ``v_N`` at its left end, so the mismatch is
    first order in the step.
    """
    if isinstance(source, Trajectory):
        for ob in source.observers:
            if isinstance(ob, BoundaryObserver):
                source = ob
                break
    if isinstance(source, Trajectory):
        t = source.times
        a = np.array([s.state.eta[-1] for s in source.snapshots])
        v = np.array([s.state.v[-1] for s in source.snapshots])
    else:
        t, a, v = np.array(source.t), np.array(source.a), np.array(source.v)
    if t.size < 2:
        return BoundaryTrack(t, a, v, 0.0)
    q = np.diff(a) / np.diff(t)
    mismatch = float(np.max(np.abs(q - v[:-1])))
    return BoundaryTrack(t, a, v, mismatch)


def eulerian_mass_series(traj: Trajectory, scheme: LagrangianScheme | None = None):
    """Reconstructed Eulerian mass at every snapshot and the reference mass."""
    sch = scheme or LagrangianScheme(traj.profile, traj.config)
    ref = float(np.sum(sch.rho_full) * sch.h)
    out = []
    for snap in traj.snapshots:
        eta, rho_cell, _, _ = sch.eulerian(snap.state)
        out.append(float(np.sum(rho_cell[:-1] * np.diff(eta))))
    return np.array(out), ref
