"""Equilibrium configurations of the chain.

The solver pins ``x1 = 0``, guesses the second position ``x2`` and marches
the interior balance

    f(x_{k+1} - x_k) = f(x_k - x_{k-1}) + F(x_k),   k = 2..N-1

to the last particle. For a non-increasing field the landing point
``x_N(x2)`` is strictly increasing in ``x2``, so bisection on ``x2`` against
``x_N = L`` finds the unique fixed point with both walls occupied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, DomainError, NoSolutionError
from .model import PiecewiseLinearField, check_configuration
from .potential import PowerLaw

LANDED = "landed"
OVERSHOOT = "overshoot"
UNDERSHOOT = "undershoot"

MAX_BISECTION = 200
ORACLE_MAX_N = 10_000


def _scalar_field(fld):
    from .model import AffineField, ConstantField

    if isinstance(fld, ConstantField):
        value = float(fld.value)
        return lambda x: value
    if isinstance(fld, AffineField):
        c0, c1 = float(fld.c0), float(fld.c1)
        return lambda x: c0 + c1 * x
    return lambda x: float(fld(x))


@dataclass
class ShootResult:
    """Outcome of one propagation from a trial ``x2``.

    ``positions`` holds every position computed before the march stopped;
    ``k_escape`` is the 1-based particle index at which the cumulative force
    became non-positive (the next gap would be infinite).
    """

    outcome: str
    x2: float
    positions: np.ndarray
    x_end: float | None = None
    k_escape: int | None = None

    @property
    def landed(self):
        return self.outcome == LANDED


@dataclass
class FixedPointResult:
    configuration: np.ndarray
    x2: float
    residual_max: float
    bisection_iterations: int
    boundary_ok_left: bool
    boundary_ok_right: bool
    non_unique: bool = False
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def positions(self):
        return self.configuration

    @property
    def gaps(self):
        return np.diff(self.configuration)

    def to_dict(self):
        return {
            "x2": float(self.x2),
            "positions": [float(v) for v in self.configuration],
            "residual_max": float(self.residual_max),
            "iterations": int(self.bisection_iterations),
            "boundary_ok": [bool(self.boundary_ok_left), bool(self.boundary_ok_right)],
            "non_unique": bool(self.non_unique),
        }


def _march(f, finv, F, x_start, first_gap, n, length):
    """Run the balance recursion from ``(x_start, x_start + first_gap)``.

    Returns the list of positions and the escape index (``None`` if all ``n``
    positions were produced). ``F`` is evaluated at positions clamped to
    ``[0, length]``.
    """
    xs = [x_start, x_start + first_gap]
    s = f(first_gap)
    for k in range(2, n):
        xk = xs[-1]
        s = s + F(min(max(xk, 0.0), length))
        if s <= 0.0:
            return xs, k
        xs.append(xk + finv(s))
    return xs, None


def propagate(params, x2, tol=None):
    """March the equilibrium recursion from ``x1 = 0`` and trial ``x2``."""
    if not x2 > 0:
        raise DomainError(f"x2 must be positive, got {x2}")
    length = params.length
    tol = 1e-12 * length if tol is None else tol
    f, finv = params.law.scalar_ops()
    xs, k_escape = _march(f, finv, _scalar_field(params.field), 0.0, float(x2), params.n_particles, length)
    positions = np.asarray(xs)
    if k_escape is not None:
        return ShootResult(OVERSHOOT, x2, positions, None, k_escape)
    x_end = xs[-1]
    if abs(x_end - length) < tol:
        outcome = LANDED
    elif x_end > length:
        outcome = OVERSHOOT
    else:
        outcome = UNDERSHOOT
    return ShootResult(outcome, x2, positions, x_end, None)


def zero_force_solution(n, length):
    """Equispaced configuration, the unique fixed point when ``F = 0``."""
    if n < 2:
        raise DomainError("need at least two particles")
    x = length * np.arange(n) / (n - 1)
    x[-1] = length
    return x


def residual(params, positions):
    """Per-particle force imbalance and its max-norm.

    Interior particles carry the full net force. A particle sitting on a wall
    only contributes the part of the net force that would pull it off the
    wall; pressing into the wall is a satisfied constraint.
    """
    x = check_configuration(positions)
    law, fld, length = params.law, params.field, params.length
    fg = np.asarray(law.force(np.diff(x)), dtype=float)
    Fx = np.asarray(fld(x), dtype=float)
    net = Fx.copy()
    net[:-1] -= fg
    net[1:] += fg
    r = net
    if x[0] <= 0.0:
        r[0] = max(0.0, net[0])
    if x[-1] >= length:
        r[-1] = min(0.0, net[-1])
    return r, float(np.max(np.abs(r)))


def _boundary_flags(params, x):
    law, fld = params.law, params.field
    left = law.force(x[1] - x[0]) >= fld(0.0)
    right = law.force(x[-1] - x[-2]) + fld(params.length) >= 0.0
    return bool(left), bool(right)


def _finish(params, x, x2, iterations, non_unique=False):
    x = np.array(x, dtype=float)
    x[0] = 0.0
    x[-1] = params.length
    r, rmax = residual(params, x)
    left, right = _boundary_flags(params, x)
    return FixedPointResult(x, float(x2), rmax, iterations, left, right, non_unique, r)


def shoot_solve(params, tol_position=None, max_iter=MAX_BISECTION):
    """Fixed point with ``x1 = 0`` and ``x_N = L`` by bisection on ``x2``.

    An escaping march counts as ``x_N = +inf``. Raises
    :class:`NoSolutionError` when no bracket ``x_N(lo) < L < x_N(hi)`` exists.
    """
    n, length = params.n_particles, params.length
    tol = 1e-12 * length if tol_position is None else tol_position
    if n == 2:
        return _finish(params, [0.0, length], length, 0)

    def shoot(x2):
        return propagate(params, x2, tol)

    unit = length / (n - 1)
    lo, floor = 0.5 * unit, 1e-3 * unit
    while True:
        res = shoot(lo)
        if res.landed:
            return _finish(params, res.positions, lo, 0, _flat_nearby(params, lo, tol))
        if res.outcome == UNDERSHOOT:
            break
        lo *= 0.5
        if lo < floor:
            raise NoSolutionError("no undershooting x2 above the bracket floor", (floor, None))
    hi = 2.0 * unit
    while True:
        res = shoot(hi)
        if res.landed:
            return _finish(params, res.positions, hi, 0, _flat_nearby(params, hi, tol))
        if res.outcome == OVERSHOOT:
            break
        if hi >= length:
            raise NoSolutionError("no overshooting x2 below L", (lo, hi))
        hi = min(2.0 * hi, length)

    # keep halving past the first landing: the extra iterations are cheap and
    # pull |x_N - L| down to rounding level
    best = None
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        it += 1
        res = shoot(mid)
        if res.x_end is not None and (best is None or abs(res.x_end - length) <= abs(best.x_end - length)):
            best = res
        if res.x_end is None or res.x_end > length:
            hi = mid
        elif res.x_end < length:
            lo = mid
        else:
            break
    if best is not None and abs(best.x_end - length) < tol:
        return _finish(params, best.positions, best.x2, it, _flat_nearby(params, best.x2, tol))
    raise NoSolutionError("bisection did not land on x_N = L (x_N(x2) may be discontinuous)", (lo, hi))


def _flat_nearby(params, x2, tol):
    """True when x_N stays at L for a nearby x2 on either side: a continuum of fixed points."""
    n, length = params.n_particles, params.length
    h = 1e-3 * length / (n - 1)
    probe_tol = max(tol, 1e-3 * h)
    trials = [t for t in (x2 - h, x2 + h) if t > 0]
    return any(propagate(params, t, probe_tol).landed for t in trials)


@dataclass
class InteriorBranchReport:
    """Search for a fixed point with ``x1 > 0`` (the left particle off the wall)."""

    n_particles: int
    feasible: bool
    n_candidates: int
    n_short: int
    reason: str
    sup_field: float
    analytic_lower_bound: float | None = None
    analytically_infeasible: bool = False
    witnesses: list = field(default_factory=list)


def _divergence_bound(params, x1, sup_f):
    """Lower bound on x_N when every gap satisfies ``f(gap) <= sup_f * k``."""
    law, n = params.law, params.n_particles
    k = np.arange(1, n)
    return x1 + float(np.sum(law.inverse(sup_f * k)))


def interior_branch(params, n_candidates=256, tol=None):
    """Check whether an equilibrium with the left particle off the wall exists.

    With ``x1 > 0`` the first particle must balance on its own,
    ``f(x2 - x1) = F(x1)``, so the first gap is fixed by ``x1`` alone and the
    march is fully determined. A candidate is feasible if the chain fits in
    ``[0, L]`` with the last particle balanced (free) or pressed into ``L``.
    """
    n, length = params.n_particles, params.length
    tol = 1e-9 * length if tol is None else tol
    xs_grid = np.linspace(0.0, length, n_candidates + 2)[1:-1]
    Fgrid = np.asarray(params.field(xs_grid), dtype=float)
    sup_f = float(max(np.max(Fgrid), params.field.sup(length)))
    if sup_f <= 0:
        return InteriorBranchReport(n, False, 0, 0, "F <= 0 on (0, L): the first particle cannot balance", sup_f)

    f, finv = params.law.scalar_ops()
    F = _scalar_field(params.field)
    candidates = []
    for x1, F1 in zip(xs_grid, Fgrid):
        if F1 <= 0:
            continue
        try:
            gap1 = finv(F1)
        except Exception:
            continue
        pos, k_escape = _march(f, finv, F, float(x1), gap1, n, length)
        if k_escape is not None or pos[-1] > length + tol:
            candidates.append((x1, None, None))
            continue
        candidates.append((x1, pos[-1], f(pos[-1] - pos[-2]) + F(min(pos[-1], length))))

    n_short = sum(1 for c in candidates if c[1] is not None)
    force_tol = 1e-9 * f(length / max(n - 1, 1))
    witnesses = []
    for x1, end, g in candidates:
        if end is None:
            continue
        if abs(g) <= force_tol or (abs(end - length) <= tol and g >= 0):
            witnesses.append(float(x1))
    for (xa, enda, ga), (xb, endb, gb) in zip(candidates, candidates[1:]):
        if enda is not None and endb is not None and ga * gb < 0:
            # balance of the free last particle changes sign between neighbours
            witnesses.append(float(0.5 * (xa + xb)))
        elif (enda is None) != (endb is None):
            # x_N crosses L; pinned there if the last particle presses outward
            g = ga if enda is not None else gb
            if g >= 0:
                witnesses.append(float(0.5 * (xa + xb)))

    try:
        bound = _divergence_bound(params, 0.0, sup_f)
    except Exception:
        bound = None
    analytic = bound is not None and bound > length
    feasible = bool(witnesses) and not analytic
    if feasible:
        reason = "balanced interior candidate found"
    elif analytic:
        reason = "sum of gap lower bounds exceeds L"
    elif n_short == 0:
        reason = "cumulative length exceeds L before the last particle for every candidate"
    else:
        reason = "no candidate balances the last particle"
    return InteriorBranchReport(n, feasible, len(candidates), n_short, reason, sup_f, bound, bool(analytic), witnesses)


def oracle_minimize(params, init, tol_grad=1e-9, max_iter=200_000):
    """Minimise ``W = sum V(gap) - sum int_0^x F`` by projected gradient descent.

    Independent of the shooting solver: it never uses the balance recursion.
    Positions stay in ``[0, L]`` and the backtracking line search rejects any
    step that brings a gap below ``1e-14 * L``.
    """
    n, length = params.n_particles, params.length
    if n > ORACLE_MAX_N:
        raise DomainError(f"oracle limited to N <= {ORACLE_MAX_N}")
    x = check_configuration(init, length).copy()
    law, fld = params.law, params.field
    gap_floor = 1e-14 * length

    def energy(z):
        return float(np.sum(law.potential(np.diff(z))) - np.sum(fld.antiderivative(z)))

    def grad(z):
        fg = law.force(np.diff(z))
        g = -np.asarray(fld(z), dtype=float)
        g[:-1] += fg
        g[1:] -= fg
        return g

    def projected(z, g):
        pg = g.copy()
        if z[0] <= 0.0 and pg[0] > 0:
            pg[0] = 0.0
        if z[-1] >= length and pg[-1] < 0:
            pg[-1] = 0.0
        return pg

    g = grad(x)
    w = energy(x)
    gmax = float(np.max(np.abs(projected(x, g))))
    if gmax == 0.0:
        return x
    eta = 0.1 * length / (n - 1) / gmax
    for _ in range(max_iter):
        pg = projected(x, g)
        if float(np.max(np.abs(pg))) < tol_grad:
            return x
        while True:
            trial = np.clip(x - eta * g, 0.0, length)
            step = trial - x
            if np.all(np.diff(trial) > gap_floor):
                w_trial = energy(trial)
                g_trial = grad(trial)
                decrease = 1e-4 / eta * float(step @ step)
                noise = 16 * np.finfo(float).eps * (abs(w) + float(np.sum(np.abs(law.potential(np.diff(x))))))
                if decrease > noise:
                    accepted = w_trial <= w - decrease
                else:
                    # W differences are below rounding; require the slope along the step to stay downhill
                    accepted = float(g_trial @ step) <= 0.0
                if accepted:
                    break
            eta *= 0.5
            if eta * max(gmax, 1.0) < 1e-300:
                raise ConvergenceError("line search collapsed", x)
        x, w, g = trial, w_trial, g_trial
        eta *= 2.0
    raise ConvergenceError(f"oracle did not converge in {max_iter} iterations", x)


def degenerate_three_body_field(law, y, table_points=4096):
    """Field on ``[0, 1]`` making every ``(0, x2, 1)`` with ``x2 in [y, 1-y]`` a fixed point.

    Tabulates ``F(x) = f(1 - x) - f(x)`` on ``[y, 1-y]`` and holds it constant outside.
    """
    if not 0 < y < 0.5:
        raise DomainError(f"y must lie in (0, 1/2), got {y}")
    xs = np.linspace(y, 1.0 - y, table_points)
    xs[-1] = 1.0 - y
    Fs = law.force(1.0 - xs) - law.force(xs)
    return PiecewiseLinearField(tuple(zip(xs.tolist(), Fs.tolist())))


def time_scale(params):
    """Period scale of the stiffest pair at the mean spacing, ``sqrt(m (L/N)^(a+1) / alpha)``."""
    law = params.law
    spacing = params.length / params.n_particles
    if isinstance(law, PowerLaw):
        return math.sqrt(params.mass * spacing ** (law.a + 1) / law.alpha)
    return math.sqrt(params.mass / abs(law.derivative(spacing)))
