"""Numerical oracles for the linearised interaction operator, coercivity,
kernel remainders, Hardy-type inequalities and weighted Beta integrals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate, special

from .kernel import RieszParams, beta_fn, exterior_tail
from .steady import SteadyProfile, with_radius

# test-only hook: set to -1.0 to flip the kernel sign inside the operator
KERNEL_SIGN = 1.0

_QUAD = dict(limit=200, epsabs=1e-14, epsrel=1e-11)


# --------------------------------------------------------------- test functions
@dataclass(frozen=True)
class TestFunction:
    """Odd ``w`` with ``w(0) = 0``, given through its even derivative ``v = w'``.

    The family kinds also have ``w'(+-1) = 0``; ``linear`` (``w = c x``) does
    not and serves as a closed-form reference. Values outside ``[-1, 1]``
    are held constant.
    """

    kind: str
    params: tuple
    kinks: tuple = ()

    def deriv(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        if self.kind == "linear":
            return np.full_like(x, self.params[0])
        if self.kind == "polynomial_odd":
            # v = (1 - x^2) * sum c_m x^{2m}
            c = np.asarray(self.params)
            return (1.0 - x * x) * np.polynomial.polynomial.polyval(x * x, c)
        if self.kind == "random_fourier":
            # v = sum b_m (cos(m pi x) - cos(m pi))
            out = np.zeros_like(x)
            for m, b in enumerate(self.params, start=1):
                out = out + b * (np.cos(m * np.pi * x) - np.cos(m * np.pi))
            return out
        if self.kind == "lipschitz_bump":
            # v = c [hat(x - b) + hat(x + b)], hats of half-width a inside (-1, 1)
            c, a, b = self.params
            return c * (np.maximum(0.0, 1.0 - np.abs(x - b) / a)
                        + np.maximum(0.0, 1.0 - np.abs(x + b) / a))
        raise ValueError(f"unknown kind {self.kind!r}")

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        if self.kind == "linear":
            return self.params[0] * x
        if self.kind == "polynomial_odd":
            c = np.asarray(self.params)
            # integrate (1 - x^2) sum c_m x^{2m} term by term
            out = np.zeros_like(x)
            for m, cm in enumerate(c):
                out = out + cm * (x ** (2 * m + 1) / (2 * m + 1) - x ** (2 * m + 3) / (2 * m + 3))
            return out
        if self.kind == "random_fourier":
            out = np.zeros_like(x)
            for m, b in enumerate(self.params, start=1):
                out = out + b * (np.sin(m * np.pi * x) / (m * np.pi) - np.cos(m * np.pi) * x)
            return out
        if self.kind == "lipschitz_bump":
            c, a, b = self.params
            return c * (_hat_integral(x - b, a) - _hat_integral(-b, a)
                        + _hat_integral(x + b, a) - _hat_integral(b, a))
        raise ValueError(f"unknown kind {self.kind!r}")

    def sup_slope(self, n: int = 4001) -> float:
        return float(np.max(np.abs(self.deriv(np.linspace(-1.0, 1.0, n)))))

    def scaled(self, factor: float) -> "TestFunction":
        if self.kind == "lipschitz_bump":
            c, a, b = self.params
            return TestFunction(self.kind, (c * factor, a, b), self.kinks)
        return TestFunction(self.kind, tuple(factor * p for p in self.params), self.kinks)


def _hat_integral(z, a):
    """Antiderivative of ``max(0, 1 - |z|/a)`` vanishing at ``z = -inf``."""
    z = np.asarray(z, dtype=float)
    zc = np.clip(z, -a, a)
    left = np.where(zc < 0, 0.5 * (zc + a) ** 2 / a, 0.5 * a)
    right = np.where(zc > 0, zc - 0.5 * zc * zc / a, 0.0)
    return left + right


@dataclass(frozen=True)
class TestFunctionFamily:
    """Seeded generator of admissible increments ``w``."""

    seed: int = 0
    count: int = 20
    kind: str = "mixed"
    amplitude_cap: float = 0.05

    def __iter__(self):
        rng = np.random.default_rng(self.seed)
        kinds = ("polynomial_odd", "random_fourier", "lipschitz_bump")
        for i in range(self.count):
            kind = kinds[i % 3] if self.kind == "mixed" else self.kind
            if kind == "polynomial_odd":
                w = TestFunction(kind, tuple(rng.normal(size=int(rng.integers(1, 5)))))
            elif kind == "random_fourier":
                m = int(rng.integers(1, 6))
                w = TestFunction(kind, tuple(rng.normal(size=m) / np.arange(1, m + 1)))
            elif kind == "lipschitz_bump":
                b = float(rng.uniform(0.0, 0.7))
                a = float(rng.uniform(0.05, min(0.95 - b, 0.6)))
                w = TestFunction(kind, (1.0, a, b), kinks=_bump_kinks(a, b))
            else:
                raise ValueError(f"unknown kind {kind!r}")
            amp = self.amplitude_cap * float(rng.uniform(0.2, 1.0))
            yield w.scaled(amp / w.sup_slope())


def _bump_kinks(a, b):
    pts = {b - a, b, b + a, -b - a, -b, -b + a}
    return tuple(sorted(p for p in pts if -1.0 < p < 1.0))


# ----------------------------------------------------------------- densities
class SmoothDensity:
    """Density on ``[-1, 1]`` (zero outside) for the quadrature oracles.

    ``knots`` are the breakpoints where the density is not smooth; the
    composite rules never integrate across them.
    """

    def __init__(self, func, deriv, knots):
        self._f = func
        self._d = deriv
        self.knots = np.unique(np.concatenate([[-1.0, 1.0], np.asarray(knots, dtype=float)]))

    @classmethod
    def from_profile(cls, profile: SteadyProfile) -> "SmoothDensity":
        """Monotone cubic interpolant of the profile moved to unit radius."""
        prof = with_radius(profile, 1.0)
        g = np.asarray(prof.grid)
        spl = interpolate.PchipInterpolator(g, np.asarray(prof.rho))
        return cls(spl, spl.derivative(), g)

    @classmethod
    def model(cls, cells: int = 64) -> "SmoothDensity":
        """``1 - x^2``; the knots only set the integration cells."""
        return cls(lambda x: 1.0 - x * x, lambda x: -2.0 * x, np.linspace(-1.0, 1.0, cells + 1))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < 1.0, self._f(np.clip(x, -1.0, 1.0)), 0.0)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < 1.0, self._d(np.clip(x, -1.0, 1.0)), 0.0)


class _Rule:
    """Composite quadrature on ``[-1, 1]`` for kernels with an
    ``|x - y|^alpha`` singularity on the diagonal."""

    GRADING = (0.0, 1.0 / 64, 1.0 / 16, 0.25, 1.0)

    def __init__(self, edges, alpha: float, m: int = 8):
        self.edges = np.asarray(edges, dtype=float)
        self.alpha = alpha
        self.m = m
        t, wt = np.polynomial.legendre.leggauss(m)
        self._t, self._wt = t, wt
        a, b = self.edges[:-1], self.edges[1:]
        self.nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * t).ravel()
        self.weights = (0.5 * (b - a)[:, None] * wt).ravel()
        self.cell = np.repeat(np.arange(a.size), m)
        # Gauss-Jacobi rules with weight (1-t)^alpha and (1+t)^alpha on [-1, 1]
        self._jl = special.roots_jacobi(m, alpha, 0.0)
        self._jr = special.roots_jacobi(m, 0.0, alpha)
        g = np.asarray(self.GRADING)
        gt = (0.5 * (g[:-1] + g[1:])[:, None] + 0.5 * np.diff(g)[:, None] * t).ravel()
        gw = (0.5 * np.diff(g)[:, None] * wt).ravel()
        self._graded = (gt, gw)                   # on [0, 1], dense near 0

    def locate(self, x):
        return np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.edges.size - 2)

    def near_nodes(self, x):
        """Nodes and weights (including ``|x-y|^alpha``) for the cell holding
        ``x`` and its two neighbours; one row per point."""
        x = np.asarray(x, dtype=float)
        c = self.locate(x)
        a, b = self.edges[c], self.edges[c + 1]
        tl, wl = self._jl
        tr, wr = self._jr
        al = self.alpha
        hl, hr = 0.5 * (x - a), 0.5 * (b - x)
        # x within rounding of an edge: drop the empty half so no node lands on x
        tiny = 1e-12 * (b - a)
        hl = np.where(hl < tiny, 0.0, hl)
        hr = np.where(hr < tiny, 0.0, hr)
        ys = [(a + x)[:, None] * 0.5 + hl[:, None] * tl, (x + b)[:, None] * 0.5 + hr[:, None] * tr]
        ws = [hl[:, None] ** (al + 1.0) * wl, hr[:, None] ** (al + 1.0) * wr]
        gt, gw = self._graded
        nc = self.edges.size - 1
        for side in (-1, 1):
            cn = c + side
            ok = (cn >= 0) & (cn < nc)
            cn = np.clip(cn, 0, nc - 1)
            lo, hi = self.edges[cn], self.edges[cn + 1]
            width = (hi - lo)[:, None]
            if side == 1:                            # dense toward the left edge
                y = lo[:, None] + width * gt
            else:
                y = hi[:, None] - width * gt
            wq = width * gw * np.abs(x[:, None] - y) ** al * ok[:, None]
            ys.append(y)
            ws.append(wq)
        return np.concatenate(ys, axis=1), np.concatenate(ws, axis=1), c

    def integrate(self, x, psi, chunk: int = 256):
        """``int_{-1}^{1} |x - y|^alpha psi(x, y) dy`` for every ``x``.

        ``psi(xcol, yrow)`` must broadcast and be smooth in ``y`` on every cell
        (and on each side of ``x`` within its own cell).
        """
        x = np.asarray(x, dtype=float)
        out = np.empty(x.size)
        for s0 in range(0, x.size, chunk):
            xs = x[s0:s0 + chunk]
            yn, wn, c = self.near_nodes(xs)
            with np.errstate(divide="ignore", invalid="ignore"):
                pn = psi(xs[:, None], yn)
            near = (np.where(wn != 0.0, pn, 0.0) * wn).sum(axis=1)
            far_mask = np.abs(self.cell[None, :] - c[:, None]) >= 2
            d = np.abs(xs[:, None] - self.nodes[None, :])
            d = np.where(far_mask, d, 1.0)
            wf = np.where(far_mask, self.weights[None, :] * d ** self.alpha, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                pv = psi(xs[:, None], self.nodes[None, :])
            far = (np.where(far_mask, pv, 0.0) * wf).sum(axis=1)
            out[s0:s0 + chunk] = near + far
        return out


def _edges(rho: SmoothDensity, w: TestFunction):
    return np.unique(np.concatenate([rho.knots, np.asarray(w.kinks, dtype=float), [0.0]]))


# ---------------------------------------------------------------- operator L
def _linop_values(w: TestFunction, rho: SmoothDensity, x, p: RieszParams, rule: _Rule):
    s = p.s
    x = np.asarray(x, dtype=float)
    rx, wx, vx = rho(x), w(x), w.deriv(x)

    def psi1(xc, yr):
        # W'(x-y)(v(x)-v(y)) = |x-y|^{2s-1} (v(x)-v(y))/(x-y); the power is in the rule
        return (w.deriv(xc) - w.deriv(yr)) / (xc - yr)

    def psi2(xc, yr):
        d = xc - yr
        return (2.0 * s - 2.0) * (rho(xc) - rho(yr)) * (w(xc) - w(yr)) / (d * d)

    i1 = rule.integrate(x, psi1) + vx * exterior_tail(x, -1.0, 1.0, p)
    w_r, w_l = float(w(1.0)), float(w(-1.0))
    ext2 = -rx * ((wx - w_r) * (1.0 - x) ** (2.0 * s - 2.0) + (wx - w_l) * (1.0 + x) ** (2.0 * s - 2.0))
    i2 = rule.integrate(x, psi2) + ext2
    return KERNEL_SIGN * (rx * rx * i1 - rx * i2)


def linop_L(w: TestFunction, profile_or_density, x, p: RieszParams | None = None,
            m: int = 8) -> np.ndarray:
    """Linearised interaction operator ``(L1 + L2) w`` at the points ``x``.

    Inner integrals use the composite rule of :class:`_Rule`; the parts
    outside ``[-1, 1]`` (density zero, ``w`` constant, ``w'`` zero) are
    added in closed form.
    """
    rho, p = _density_and_params(profile_or_density, p)
    rule = _Rule(_edges(rho, w), 2.0 * p.s - 1.0, m)
    return _linop_values(w, rho, np.atleast_1d(np.asarray(x, dtype=float)), p, rule)


def _density_and_params(obj, p):
    if isinstance(obj, SteadyProfile):
        return SmoothDensity.from_profile(obj), p or obj.params
    if p is None:
        raise ValueError("params required with an explicit density")
    return obj, p


def quadratic_form(w: TestFunction, profile_or_density, p: RieszParams | None = None,
                   m: int = 8) -> float:
    """``int_{-1}^{1} w L w dx`` with the outer integral on the same cells."""
    rho, p = _density_and_params(profile_or_density, p)
    rule = _Rule(_edges(rho, w), 2.0 * p.s - 1.0, m)
    lw = _linop_values(w, rho, rule.nodes, p, rule)
    return float(np.sum(rule.weights * w(rule.nodes) * lw))


def double_form(w: TestFunction, profile_or_density, p: RieszParams | None = None,
                m: int = 8) -> float:
    """``iint_{-1<x<y<1} rho(x) rho(y) |w(x)-w(y)|^2 / |x-y|^{3-2s} dx dy``."""
    rho, p = _density_and_params(profile_or_density, p)
    rule = _Rule(_edges(rho, w), 2.0 * p.s - 1.0, m)

    def psi(xc, yr):
        d = xc - yr
        dw = w(xc) - w(yr)
        return rho(yr) * dw * dw / (d * d)

    inner = rule.integrate(rule.nodes, psi)
    # symmetric integrand: half of the full square
    return 0.5 * float(np.sum(rule.weights * rho(rule.nodes) * inner))


@dataclass(frozen=True)
class IdentityResult:
    lhs: float
    rhs: float
    rel_error: float


def quadratic_identity_check(w: TestFunction, profile_or_density, p: RieszParams | None = None,
                             m: int = 8) -> IdentityResult:
    """Compare ``int w L w`` with ``-2(1-s)`` times the weighted double integral."""
    rho, p = _density_and_params(profile_or_density, p)
    lhs = quadratic_form(w, rho, p, m)
    rhs = -2.0 * (1.0 - p.s) * double_form(w, rho, p, m)
    scale = max(abs(rhs), 1e-300)
    return IdentityResult(lhs, rhs, abs(lhs - rhs) / scale)


def linop_L_grid(w_values, rho_values, grid, p: RieszParams) -> np.ndarray:
    """Plain grid-sum version of the operator (self node dropped, no
    corrections); the O(N^2) reference used to cross-check simple cases.

    ``w`` is extended by constants and ``rho`` by zero; the slope of ``w`` is
    the centred difference inside and zero outside. The exterior parts of
    both integrals are added in closed form. End nodes return 0.
    """
    w = np.asarray(w_values, dtype=float)
    rho = np.asarray(rho_values, dtype=float)
    x = np.asarray(grid, dtype=float)
    h = x[1] - x[0]
    s = p.s
    v = np.gradient(w, h)
    v[[0, -1]] = 0.0
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    ad = np.abs(d)
    k1 = np.sign(d) * ad ** (2 * s - 2)
    k2 = (2 * s - 2) * ad ** (2 * s - 3)
    np.fill_diagonal(k1, 0.0)
    np.fill_diagonal(k2, 0.0)
    out = np.zeros_like(x)
    xi = x[1:-1]
    left, right = x[0], x[-1]
    i1 = ((k1 * (v[:, None] - v[None, :])).sum(axis=1) * h)[1:-1] + v[1:-1] * exterior_tail(xi, left, right, p)
    i2 = ((k2 * (rho[:, None] - rho[None, :]) * (w[:, None] - w[None, :])).sum(axis=1) * h)[1:-1]
    r = rho[1:-1]
    i2 = i2 - r * ((w[1:-1] - w[-1]) * (right - xi) ** (2 * s - 2)
                   + (w[1:-1] - w[0]) * (xi - left) ** (2 * s - 2))
    out[1:-1] = r * r * i1 - r * i2
    return KERNEL_SIGN * out


# ------------------------------------------------------------------ coercivity
@dataclass(frozen=True)
class CoercivityResult:
    lhs: float
    rhs: float
    passed: bool

    @property
    def ratio(self) -> float:
        return self.rhs / self.lhs if self.lhs > 0 else 0.0


def coercivity_check(w, profile: SteadyProfile, weight: str = "rho_gamma") -> CoercivityResult:
    """Discrete ``sum rho^gamma |dw/h|^2 h`` against the weighted double sum.

    ``w`` is a :class:`TestFunction` or an array on the unit-radius profile
    grid. The cell weight is the mean of ``rho^gamma`` at the two endpoints;
    ``weight="theta"`` uses the discrete surrogate from the scheme instead,
    for which the inequality holds exactly by Cauchy-Schwarz.
    """
    from .scheme import theta_weights

    prof = with_radius(profile, 1.0)
    x = np.asarray(prof.grid)
    rho = np.asarray(prof.rho)
    h = prof.h
    wv = np.asarray(w(x) if callable(w) else w, dtype=float)
    slope = np.diff(wv) / h
    if weight == "rho_gamma":
        cw = 0.5 * (rho[:-1] ** prof.gamma + rho[1:] ** prof.gamma)
    elif weight == "theta":
        cw = theta_weights(prof)[:-1]
    else:
        raise ValueError(f"unknown weight {weight!r}")
    lhs = float(np.sum(cw * slope * slope) * h)
    d = x[:, None] - x[None, :]
    iu = np.triu_indices(x.size, 1)
    dd = np.abs(d[iu])
    dw = (wv[:, None] - wv[None, :])[iu]
    rr = (rho[:, None] * rho[None, :])[iu]
    rhs = float(np.sum(rr * dw * dw * dd ** (2 * prof.s - 3.0)) * h * h)
    return CoercivityResult(lhs, rhs, lhs >= rhs * (1.0 - 1e-8))


# ------------------------------------------------------------------ remainders
REMAINDERS = ("R02", "R11", "R10", "R3", "R4")


def remainder_value(which: str, dx: float, dw: float, p: RieszParams) -> float:
    """Kernel remainder for the pair ``(x, y)`` with ``dx = x - y`` and
    ``dw = w(x) - w(y)``, so that ``eta(x) - eta(y) = dx + dw``."""
    s = p.s
    de = dx + dw
    a, ae = abs(dx), abs(de)
    if which == "R02":
        return ((ae ** (2 * s - 1) - a ** (2 * s - 1)) / (2 * s - 1)
                - dx / a ** (3 - 2 * s) * dw - (s - 1) / a ** (3 - 2 * s) * dw * dw)
    if which == "R11":
        return de / ae ** (3 - 2 * s) - dx / a ** (3 - 2 * s) - 2 * (s - 1) * dw / a ** (3 - 2 * s)
    if which == "R10":
        return de / ae ** (3 - 2 * s) - dx / a ** (3 - 2 * s)
    if which == "R3":
        return -1.0 / ae ** (3 - 2 * s) + 1.0 / a ** (3 - 2 * s)
    if which == "R4":
        return -1.0 / ae ** (4 - 2 * s) + 1.0 / a ** (4 - 2 * s)
    raise ValueError(f"unknown remainder {which!r}")


def remainder_bound(which: str, dx: float, dw: float, aeps: float, p: RieszParams) -> float:
    s = p.s
    a = abs(dx)
    if which == "R02":
        return 4 * (1 - s) * (3 - 2 * s) * aeps * dw * dw / a ** (3 - 2 * s)
    if which == "R11":
        return 2 * (1 - s) * (3 - 2 * s) * aeps ** 2 / a ** (2 - 2 * s)
    if which == "R10":
        return 2 * (1 - s) * aeps / (1 - aeps) ** (3 - 2 * s) / a ** (2 - 2 * s)
    if which == "R3":
        return (3 - 2 * s) * aeps * (1 + aeps) / (1 - aeps) ** (5 - 2 * s) / a ** (3 - 2 * s)
    if which == "R4":
        return (4 - 2 * s) * aeps * (1 + aeps) / (1 - aeps) ** (6 - 2 * s) / a ** (4 - 2 * s)
    raise ValueError(f"unknown remainder {which!r}")


@dataclass(frozen=True)
class RemainderResult:
    value: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        """``1 - |value| / bound`` (negative on failure)."""
        if self.bound == 0.0:
            return 1.0 if self.value == 0.0 else -np.inf
        return 1.0 - abs(self.value) / self.bound


def remainder_bound_check(which: str, w, x: float, y: float, p: RieszParams,
                          aeps: float | None = None) -> RemainderResult:
    """Evaluate a remainder by its definition and compare with its bound.

    ``aeps`` is the slope cap ``A eps_0``; by default the measured
    ``sup |w'|`` of ``w``. The hypothesis ``sup |w'| <= A eps_0 < 1/2`` is
    enforced.
    """
    dx = float(x) - float(y)
    if abs(dx) < 10.0 * np.finfo(float).eps:
        raise ValueError("x and y coincide")
    slope = w.sup_slope()
    if aeps is None:
        aeps = slope
    if not (slope <= aeps * (1 + 1e-12) and aeps < 0.5):
        raise ValueError("increment violates the slope hypothesis")
    dw = float(w(x)) - float(w(y))
    val = remainder_value(which, dx, dw, p)
    bnd = remainder_bound(which, dx, dw, aeps, p)
    return RemainderResult(val, bnd, abs(val) <= bnd * (1.0 + 1e-8))


def remainder_sweep(p: RieszParams, trials: int = 10_000, aeps: float = 0.05, seed: int = 0,
                    functions: int = 50) -> dict:
    """Random ``(w, x, y)`` triples; failures and worst margin per remainder."""
    rng = np.random.default_rng(seed)
    fam = list(TestFunctionFamily(seed=seed, count=functions, amplitude_cap=aeps))
    out = {r: {"trials": 0, "failures": 0, "worst_margin": np.inf} for r in REMAINDERS}
    for _ in range(trials):
        w = fam[int(rng.integers(len(fam)))]
        x, y = rng.uniform(-1.0, 1.0, size=2)
        if abs(x - y) < 1e-6:
            continue
        for r in REMAINDERS:
            res = remainder_bound_check(r, w, x, y, p, aeps=aeps)
            rec = out[r]
            rec["trials"] += 1
            rec["failures"] += int(not res.passed)
            rec["worst_margin"] = min(rec["worst_margin"], res.margin)
    return out


def remainder_scaling(which: str, p: RieszParams, seed: int = 0, samples: int = 200,
                      amplitude: float = 0.05) -> float:
    """Median exponent ``log2(|R(a)| / |R(a/2)|)`` over random pairs and
    increments; ``R`` is evaluated at increment amplitudes ``a`` and ``a/2``."""
    rng = np.random.default_rng(seed)
    fam = list(TestFunctionFamily(seed=seed, count=30, amplitude_cap=amplitude))
    ex = []
    for _ in range(samples):
        w = fam[int(rng.integers(len(fam)))]
        x, y = rng.uniform(-1.0, 1.0, size=2)
        dx = x - y
        dw = float(w(x)) - float(w(y))
        if abs(dx) < 1e-3 or abs(dw) < 1e-8:
            continue
        r1 = remainder_value(which, dx, dw, p)
        r2 = remainder_value(which, dx, 0.5 * dw, p)
        if r1 != 0.0 and r2 != 0.0:
            ex.append(np.log2(abs(r1) / abs(r2)))
    return float(np.median(ex))


# ----------------------------------------------------------------------- Hardy
@dataclass(frozen=True)
class HardyResult:
    lhs: float
    rhs: float
    ratio: float


def hardy_check(f, k_exp: float, n: int = 4000, deriv=None) -> HardyResult:
    """``int_0^{1/2} x^{k-2} f^2`` against ``int_0^{1/2} x^k (f^2 + f'^2)``.

    ``f`` is a callable (sampled at midpoints of ``n`` cells) or an array of
    midpoint samples. The derivative uses ``deriv`` when given, otherwise
    ``numpy.gradient``.
    """
    if not k_exp > 1.0:
        raise ValueError("weight exponent must exceed 1")
    dx = 0.5 / n
    x = (np.arange(n) + 0.5) * dx
    fv = np.asarray(f(x) if callable(f) else f, dtype=float)
    if fv.size != n:
        raise ValueError("sample count does not match n")
    dv = np.asarray(deriv(x), dtype=float) if deriv is not None else np.gradient(fv, dx)
    lhs = float(np.sum(x ** (k_exp - 2.0) * fv * fv) * dx)
    rhs = float(np.sum(x ** k_exp * (fv * fv + dv * dv)) * dx)
    ratio = 0.0 if lhs == 0.0 else lhs / rhs
    return HardyResult(lhs, rhs, ratio)


# ------------------------------------------------------------ weighted Beta
def model_single_integral(x: float, alpha: float, s: float) -> float:
    """``int_{-1}^{1} (1 - |y|)^{-alpha} |x - y|^{2s-1} dy`` for ``|x| < 1``.

    The interval is split at 0 and ``x`` so that every singular factor sits
    at an endpoint of a piece and is handled by the algebraic-weight rule.
    """
    if not abs(x) < 1.0:
        raise ValueError("x must lie inside (-1, 1)")
    k = 2.0 * s - 1.0
    cuts = sorted({-1.0, 0.0, float(x), 1.0})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        left_half = b <= 0.0
        ea = -alpha if a == -1.0 else (k if a == x else 0.0)
        eb = -alpha if b == 1.0 else (k if b == x else 0.0)

        def f(y, a=a, b=b, left_half=left_half):
            val = 1.0
            if not (a == -1.0 or b == 1.0):
                val *= (1.0 - abs(y)) ** (-alpha)
            elif a == -1.0 and not left_half:
                val *= (1.0 - abs(y)) ** (-alpha)
            if not (a == x or b == x):
                val *= abs(x - y) ** k
            return val

        if ea == 0.0 and eb == 0.0:
            v, _ = integrate.quad(f, a, b, **_QUAD)
        else:
            v, _ = integrate.quad(f, a, b, weight="alg", wvar=(ea, eb), **_QUAD)
        total += v
    return float(total)


def model_double_integral(alpha: float, beta: float, s: float, epsrel: float = 1e-8) -> float:
    """``iint (1-|x|)^{-alpha} (1-|y|)^{-beta} |x-y|^{2s-1} dx dy`` over ``[-1, 1]^2``."""
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise ValueError("alpha and beta must lie in (0, 1)")
    if not 1.0 + 2.0 * s > alpha + beta:
        raise ValueError("needs 1 + 2s > alpha + beta")
    # even integrand in x: twice the integral over [0, 1) with the boundary weight
    val, _ = integrate.quad(lambda x: model_single_integral(min(x, 1.0 - 1e-12), beta, s), 0.0, 1.0,
                            weight="alg", wvar=(0.0, -alpha), limit=200,
                            epsabs=0.0, epsrel=epsrel)
    return 2.0 * float(val)


@dataclass(frozen=True)
class BetaCheck:
    x: float
    alpha: float
    s: float
    quadrature: float
    closed_form: float

    @property
    def rel_error(self) -> float:
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def beta_identity_check(x: float, alpha: float, s: float) -> BetaCheck:
    """Left-boundary model integral against ``(1+x)^{2s-alpha} B(1-alpha, 2s)``."""
    from .kernel import weighted_beta_integral

    q = weighted_beta_integral(x, alpha, s)
    c = (1.0 + x) ** (2.0 * s - alpha) * beta_fn(1.0 - alpha, 2.0 * s)
    return BetaCheck(float(x), float(alpha), float(s), q, c)


@dataclass(frozen=True)
class WeightBoundResult:
    constant: float
    worst_x: float
    passed: bool


def weight_bound_check(alpha: float, profile: SteadyProfile | None = None, s: float = 0.45,
                   xs=None, constant: float | None = None) -> WeightBoundResult:
    """Empirical constant in ``int rho^{-alpha}(y)|x-y|^{2s-1} dy <= C rho^{2s-alpha}(x)``.

    Without a profile the model weight ``1 - |x|`` is used and the integral is
    computed by quadrature. With a profile the integral is a midpoint sum over
    the cells of its unit-radius grid (the weight is singular at the support
    edge only). When ``constant`` is given, ``passed`` reports whether the
    measured constant stays below it.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if profile is None:
        if xs is None:
            xs = np.linspace(-0.99, 0.99, 41)
        vals = np.array([model_single_integral(float(xi), alpha, s) / (1.0 - abs(xi)) ** (2 * s - alpha)
                         for xi in xs])
    else:
        prof = with_radius(profile, 1.0)
        s = prof.s
        g = np.asarray(prof.grid)
        rho = np.asarray(prof.rho)
        mid = 0.5 * (g[1:] + g[:-1])
        rmid = 0.5 * (rho[1:] + rho[:-1])
        h = prof.h
        if xs is None:
            xs = g[1:-1]
        vals = []
        for xi in xs:
            d = np.abs(xi - mid)
            integral = float(np.sum(rmid ** (-alpha) * d ** (2 * s - 1)) * h)
            vals.append(integral / float(np.interp(xi, g, rho)) ** (2 * s - alpha))
        vals = np.array(vals)
    i = int(np.argmax(vals))
    c = float(vals[i])
    ok = True if constant is None else c <= constant
    return WeightBoundResult(c, float(np.asarray(xs)[i]), ok)
