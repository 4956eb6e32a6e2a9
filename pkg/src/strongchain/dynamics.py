"""Damped Newtonian dynamics with completely inelastic walls.

    m x_i'' = f(x_i - x_{i-1}) - f(x_{i+1} - x_i) + F(x_i) - A x_i'

A particle that reaches a wall stops dead and sticks until the net force
pulls it back into the segment. The total energy ``H = KE + W`` is a
Lyapunov function: it decays at rate ``A * sum(v**2)`` and drops further at
each impact.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DomainError, StiffnessError
from .fixedpoint import time_scale
from .model import check_configuration

logger = logging.getLogger(__name__)

MAX_HALVINGS = 20
ENERGY_SLACK = 1e-9
LEFT, RIGHT = "left", "right"


@dataclass
class ChainState:
    positions: np.ndarray
    velocities: np.ndarray
    stuck_left: bool = False
    stuck_right: bool = False
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        if self.positions.shape != self.velocities.shape:
            raise DomainError("positions and velocities must have the same length")
        check_configuration(self.positions)
        if self.stuck_left and (self.positions[0] != 0.0 or self.velocities[0] != 0.0):
            raise DomainError("stuck_left requires x1 = 0 and v1 = 0")
        if self.stuck_right and self.velocities[-1] != 0.0:
            raise DomainError("stuck_right requires v_N = 0")

    def copy(self):
        return replace(self, positions=self.positions.copy(), velocities=self.velocities.copy())

    @classmethod
    def at_rest(cls, params, positions, velocities=None, snap_tol=1e-9):
        """State with endpoints within ``snap_tol * L`` of a wall moved onto it.

        An endpoint on a wall with zero velocity starts stuck when the static
        force presses it into the wall.
        """
        length = params.length
        x = np.array(positions, dtype=float)
        v = np.zeros_like(x) if velocities is None else np.array(velocities, dtype=float)
        if abs(x[0]) <= snap_tol * length:
            x[0] = 0.0
        if abs(x[-1] - length) <= snap_tol * length:
            x[-1] = length
        check_configuration(x, length)
        fc = _conservative_force(params, x)
        stuck_left = bool(x[0] == 0.0 and v[0] <= 0.0 and fc[0] <= 0.0)
        stuck_right = bool(x[-1] == length and v[-1] >= 0.0 and fc[-1] >= 0.0)
        if stuck_left:
            v[0] = 0.0
        if stuck_right:
            v[-1] = 0.0
        return cls(x, v, stuck_left, stuck_right, 0.0)


@dataclass
class WallEvent:
    time: float
    side: str
    v_pre: float
    energy_before: float
    energy_after: float
    kinetic_removed: float = 0.0

    def to_row(self):
        return (self.time, self.side, self.v_pre)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    energies: np.ndarray
    distances: np.ndarray | None
    events_so_far: np.ndarray
    wall_events: list = field(default_factory=list)
    final_state: ChainState | None = None
    first_passage: float | None = None

    def rows(self):
        rho = self.distances if self.distances is not None else [float("nan")] * len(self.times)
        return list(zip(self.times, self.energies, rho, self.events_so_far))


def _conservative_force(params, x):
    fg = np.asarray(params.law.force(np.diff(x)), dtype=float)
    out = np.asarray(params.field(x), dtype=float).copy()
    out[:-1] -= fg
    out[1:] += fg
    return out


def net_force(params, state):
    """Force on each particle including damping; stuck particles get their unconstrained force."""
    check_configuration(state.positions)
    return _conservative_force(params, state.positions) - params.damping * state.velocities


def _potential_energy(params, x):
    return float(np.sum(params.law.potential(np.diff(x))) - np.sum(params.field.antiderivative(x)))


def total_energy(params, state):
    """``H = sum m v^2 / 2 + sum V(gap) - sum int_0^x F``."""
    check_configuration(state.positions)
    v = state.velocities
    return 0.5 * params.mass * float(v @ v) + _potential_energy(params, state.positions)


def distance(a, b):
    """``rho(X, Y) = sum |x_k - y_k|``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"configurations differ in size: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b)))


class _Stepper:
    """Velocity-Verlet stepping with cached forces and energy for one simulation."""

    def __init__(self, params, gap_floor=None, check_energy=None):
        self.params = params
        self.length = params.length
        self.m = params.mass
        self.A = params.damping
        self.gap_floor = 1e-12 * params.length if gap_floor is None else gap_floor
        self.check_energy = self.A > 0 if check_energy is None else check_energy
        self.F0 = float(params.field(0.0))
        self.FL = float(params.field(params.length))

    def raw(self, x, v, sl, sr, fc, h, t, dt):
        """One unsubdivided step; returns ``None`` if the step must be retried smaller."""
        p, m, A, L = self.params, self.m, self.A, self.length
        c = 0.5 * dt / m
        vh = v + c * (fc - A * v)
        if sl:
            vh[0] = 0.0
        if sr:
            vh[-1] = 0.0
        xn = x + dt * vh
        impacts = []
        if xn[0] < 0.0:
            impacts.append((LEFT, float(vh[0])))
            xn[0] = 0.0
            vh[0] = 0.0
            sl = True
        if xn[-1] > L:
            impacts.append((RIGHT, float(vh[-1])))
            xn[-1] = L
            vh[-1] = 0.0
            sr = True
        gaps = np.diff(xn)
        if np.any(gaps <= self.gap_floor):
            return None
        fg = p.law.force(gaps)
        # release once the instantaneous force pulls the particle off the wall
        if sl and self.F0 - fg[0] > 0.0:
            sl = False
        if sr and fg[-1] + self.FL < 0.0:
            sr = False
        fcn = np.asarray(p.field(xn), dtype=float).copy()
        fcn[:-1] -= fg
        fcn[1:] += fg
        vn = (vh + c * fcn) / (1.0 + c * A)
        if sl:
            vn[0] = 0.0
        if sr:
            vn[-1] = 0.0
        hn = 0.5 * m * float(vn @ vn) + float(np.sum(p.law.potential(gaps)) - np.sum(p.field.antiderivative(xn)))
        if self.check_energy and hn - h > ENERGY_SLACK * (1.0 + abs(h)):
            return None
        events = [WallEvent(t + dt, side, vpre, h, hn, 0.5 * m * vpre**2) for side, vpre in impacts]
        return xn, vn, sl, sr, fcn, hn, events

    def advance(self, x, v, sl, sr, fc, h, t, dt, depth=0):
        out = self.raw(x, v, sl, sr, fc, h, t, dt)
        if out is not None:
            return out + (t + dt,)
        if depth >= MAX_HALVINGS:
            raise StiffnessError(
                f"time step underflow at t={t:.6g} after {MAX_HALVINGS} halvings",
                ChainState(x.copy(), v.copy(), sl, sr, t),
            )
        half = 0.5 * dt
        x1, v1, sl1, sr1, fc1, h1, ev1, t1 = self.advance(x, v, sl, sr, fc, h, t, half, depth + 1)
        x2, v2, sl2, sr2, fc2, h2, ev2, t2 = self.advance(x1, v1, sl1, sr1, fc1, h1, t1, half, depth + 1)
        return x2, v2, sl2, sr2, fc2, h2, ev1 + ev2, t2


def default_dt(params):
    return 0.01 * time_scale(params)


def step(params, state, dt, events=None, gap_floor=None):
    """Advance ``state`` by ``dt`` (sub-stepping if needed); wall events are appended to ``events``."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    stepper = _Stepper(params, gap_floor)
    x, v = state.positions.copy(), state.velocities.copy()
    fc = _conservative_force(params, x)
    h = total_energy(params, state)
    xn, vn, sl, sr, _, _, evs, t = stepper.advance(x, v, state.stuck_left, state.stuck_right, fc, h, state.time, dt)
    if events is not None:
        events.extend(evs)
    return ChainState(xn, vn, sl, sr, t)


def simulate(params, init, t_end, sample_dt, target=None, dt=None, tol_rho=None, gap_floor=None):
    """Integrate from ``init`` to ``t_end`` and sample ``H`` (and ``rho`` to ``target``).

    ``first_passage`` is the first sample time at which ``rho < tol_rho``
    (only when both ``target`` and ``tol_rho`` are given).
    """
    if not sample_dt > 0 or not t_end >= init.time:
        raise DomainError("need sample_dt > 0 and t_end >= init.time")
    dt = default_dt(params) if dt is None else dt
    stepper = _Stepper(params, gap_floor)
    x, v = init.positions.copy(), init.velocities.copy()
    sl, sr, t = init.stuck_left, init.stuck_right, init.time
    fc = _conservative_force(params, x)
    h = total_energy(params, init)
    target = None if target is None else np.asarray(target, dtype=float)

    times, energies, rhos, counts, events = [t], [h], [], [0], []
    first = None
    if target is not None:
        rhos.append(distance(x, target))
        if tol_rho is not None and rhos[-1] < tol_rho:
            first = t
    n_samples = int(np.floor((t_end - init.time) / sample_dt + 1e-9))
    sample_times = init.time + sample_dt * np.arange(1, n_samples + 1)
    if n_samples == 0 or sample_times[-1] < t_end - 1e-12 * max(1.0, t_end):
        sample_times = np.append(sample_times, t_end)
    for ts in sample_times:
        while ts - t > 1e-12 * dt:
            x, v, sl, sr, fc, h, evs, t = stepper.advance(x, v, sl, sr, fc, h, t, min(dt, ts - t))
            events.extend(evs)
        t = ts
        times.append(t)
        energies.append(h)
        counts.append(len(events))
        if target is not None:
            rhos.append(distance(x, target))
            if first is None and tol_rho is not None and rhos[-1] < tol_rho:
                first = t
    logger.debug("simulated to t=%g with %d wall events", t, len(events))
    return TrajectoryRecord(
        np.asarray(times),
        np.asarray(energies),
        np.asarray(rhos) if target is not None else None,
        np.asarray(counts),
        events,
        ChainState(x, v, sl, sr, t),
        first,
    )


def random_state(params, rng, max_speed=1.0, min_gap_fraction=0.2):
    """Random ordered positions in ``[0, L]`` and uniform velocities in ``[-max_speed, max_speed]``.

    Gaps are at least ``min_gap_fraction * L / N``; endpoints start off the walls.
    """
    n, length = params.n_particles, params.length
    min_gap = min_gap_fraction * length / n
    slack = length - min_gap * (n + 1)
    cuts = np.sort(rng.uniform(0.0, slack, size=n))
    x = cuts + min_gap * np.arange(1, n + 1)
    v = rng.uniform(-max_speed, max_speed, size=n)
    return ChainState(x, v)
