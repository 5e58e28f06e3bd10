import time
from dataclasses import dataclass, field

import pytest

from riesz_star.diagnostics import BoundaryObserver, RepresentationTracker
from riesz_star.kernel import RieszParams
from riesz_star.scheme import LagrangianScheme, SchemeConfig, simulate
from riesz_star.steady import solve_steady, with_radius

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line[1])


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(num: int, name: str, passed: bool, detail: str):
        line = f"CRITERION {num:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append((num, line))
        return passed

    return _report


@pytest.fixture(scope="session")
def params():
    return RieszParams()


@pytest.fixture(scope="session")
def timed_profile400(params):
    t0 = time.process_time()
    prof = solve_steady(params, n=400)
    return prof, time.process_time() - t0


@pytest.fixture(scope="session")
def profile400(timed_profile400):
    return timed_profile400[0]


@pytest.fixture(scope="session")
def profile200(params):
    return solve_steady(params, n=200)


@pytest.fixture(scope="session")
def profile800(params):
    return solve_steady(params, n=800)


@pytest.fixture(scope="session")
def unit400(profile400):
    return with_radius(profile400, 1.0)


@pytest.fixture(scope="session")
def scheme50(profile400):
    return LagrangianScheme(profile400, SchemeConfig(n=50))


@dataclass
class Run:
    traj: object
    scheme: LagrangianScheme
    boundary: BoundaryObserver
    tracker: RepresentationTracker | None = None
    extra: dict = field(default_factory=dict)


def run_case(profile, **cfg_kwargs) -> Run:
    cfg = SchemeConfig(**cfg_kwargs)
    sch = LagrangianScheme(profile, cfg)
    bo = BoundaryObserver()
    tr = RepresentationTracker(sch)
    traj = simulate(cfg, profile, observers=[bo, tr], scheme=sch)
    return Run(traj, sch, bo, tr)


@pytest.fixture(scope="session")
def long_run(profile400):
    """Cached N = 200, t_end = 50 imex_be runs keyed by eps0."""
    cache = {}

    def get(eps0: float) -> Run:
        if eps0 not in cache:
            cache[eps0] = run_case(profile400, n=200, t_end=50.0, eps0=eps0)
        return cache[eps0]

    return get


@pytest.fixture(scope="session")
def short_run(profile400):
    return run_case(profile400, n=50, t_end=5.0, eps0=0.01)
