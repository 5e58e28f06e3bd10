import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riesz_star.diagnostics import (DegenerateFitError, EnergyReport, RepresentationTracker,
                                    boundary_track, decay_fit, energy_discrete, energy_naive,
                                    eulerian_mass_series, jacobian_representation_check,
                                    trajectory_reports)
from riesz_star.scheme import GridState, SchemeConfig, simulate

from conftest import run_case


def _velocity_state(sch, c=0.01):
    x = sch.x
    return GridState(0.0, x.copy(), c * x * (1 - x * x) ** 2, sch.h)


def test_energy_components_sum(short_run):
    for r in trajectory_reports(short_run.traj):
        assert r.e_n == pytest.approx(r.sup_term + r.w2_second_diff + r.w2_accel, rel=1e-14)
        assert r.w2_second_diff == pytest.approx(r.w2_second_diff_alt, rel=1e-12, abs=1e-300)
        assert all(v >= 0.0 for v in r.decay_norms.values())
        assert r.jacobian_minmax[0] > 0.0
        assert len(r.row()) == len(EnergyReport.CSV_COLUMNS)


def test_energy_matches_naive_sum(scheme50, short_run):
    for st in (_velocity_state(scheme50), short_run.traj.snapshots[3].state):
        f = scheme50.forces(st)
        fast = energy_discrete(st, f.accel, scheme50.rho, scheme50.params.gamma).e_n
        slow = energy_naive(st, f.accel, scheme50.rho, scheme50.params.gamma)
        assert fast == pytest.approx(slow, rel=1e-12)


def test_velocity_homogeneity(scheme50):
    g = scheme50.params.gamma
    zero = np.zeros(scheme50.n + 1)
    r1 = energy_discrete(_velocity_state(scheme50, 0.01), zero, scheme50.rho, g)
    r2 = energy_discrete(_velocity_state(scheme50, 0.02), zero, scheme50.rho, g)
    assert r2.sup_dv == pytest.approx(2.0 * r1.sup_dv, rel=1e-14)
    assert r2.sup_term == pytest.approx(4.0 * r1.sup_term, rel=1e-14)
    assert r2.decay_norms["velocity"] ** 2 == pytest.approx(4.0 * r1.decay_norms["velocity"] ** 2, rel=1e-14)


def test_energy_floor_at_steady_state(scheme50):
    st = scheme50.identity_state()
    f = scheme50.forces(st)
    r = energy_discrete(st, f.accel, scheme50.rho, scheme50.params.gamma)
    assert r.e_n <= scheme50.h ** 2


def test_decay_fit_synthetic():
    t = np.linspace(0.0, 50.0, 201)
    fit = decay_fit(t, (1 + t) ** -0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(1.0, 10.0, 50)
    assert decay_fit(t, np.exp(-t), window=(1.0, 10.0)).slope < -1.0
    assert decay_fit(t, np.full(t.size, 3.0), window=(1.0, 10.0)).slope == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40)
@given(st.floats(1e-6, 1e6), st.floats(-2.0, 0.0))
def test_decay_fit_scale_invariant(c, rate):
    t = np.linspace(0.0, 50.0, 101)
    y = (1 + t) ** rate * (1.0 + 0.1 * np.sin(t))
    a = decay_fit(t, y)
    b = decay_fit(t, c * y)
    assert b.slope == pytest.approx(a.slope, abs=1e-9)


def test_decay_fit_degenerate():
    t = np.linspace(0.0, 50.0, 201)
    with pytest.raises(DegenerateFitError):
        decay_fit(t[:25], np.ones(25))                  # 5 samples inside [5, 50]
    with pytest.raises(DegenerateFitError):
        decay_fit(t, np.zeros_like(t))
    with pytest.raises(DegenerateFitError):
        decay_fit(t, np.full(t.size, 1e-16))


def test_representation_tracker(short_run):
    tr = short_run.tracker
    assert tr.deviation[0] <= 1e-15
    assert tr.max_deviation <= 0.05
    assert jacobian_representation_check(short_run.traj) == tr.max_deviation


def test_representation_from_snapshots(profile400):
    # the snapshot fallback converges to the per-step tracker as snapshots densify
    gaps = []
    for every in (0.05, 0.01, 0.0025):
        run = run_case(profile400, n=50, t_end=0.5, eps0=0.01, snapshot_every=every)
        bare = type(run.traj)(config=run.traj.config, profile=run.traj.profile,
                              snapshots=run.traj.snapshots)
        gaps.append(abs(jacobian_representation_check(bare, run.scheme) - run.tracker.max_deviation))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 1e-4


def test_boundary_track(short_run, profile400):
    bt = boundary_track(short_run.traj)
    assert bt.t.size == short_run.traj.steps + 1
    assert bt.max_speed_mismatch <= 1e-3
    tr = simulate(SchemeConfig(n=50, t_end=2.0, eps0=0.0), profile400)
    steady = boundary_track(tr)
    assert np.ptp(steady.a) <= 1e-14
    assert steady.max_speed_mismatch <= 1e-13


def test_eulerian_mass_conserved(short_run):
    masses, ref = eulerian_mass_series(short_run.traj, short_run.scheme)
    assert np.max(np.abs(masses - ref)) <= 1e-12


def test_tracker_records_on_cadence(short_run):
    tracker = short_run.tracker
    assert isinstance(tracker, RepresentationTracker)
    np.testing.assert_allclose(tracker.times, short_run.traj.times, atol=1e-9)
