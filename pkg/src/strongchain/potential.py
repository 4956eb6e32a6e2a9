"""Repulsive nearest-neighbour force laws.

A law provides the pair force ``f(r) > 0`` (strictly decreasing in ``r``),
its inverse, and the pair potential ``V`` with ``-dV/dr = f``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, RangeError


def _check_positive_length(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError(f"pair distance must be positive, got {r.min() if r.ndim else float(r)}")
    return r


def _unwrap(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class PowerLaw:
    """``f(r) = alpha * r**(-a)`` with ``a > 1``."""

    a: float = 2.0
    alpha: float = 1.0

    def __post_init__(self):
        if not self.a > 1:
            raise DomainError(f"exponent a must exceed 1, got {self.a}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    def force(self, r):
        r = _check_positive_length(r)
        return _unwrap(self.alpha * r ** (-self.a))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(~(y > 0)):
            raise DomainError("f is strictly positive; no distance produces a non-positive force")
        return _unwrap((y / self.alpha) ** (-1.0 / self.a))

    def potential(self, r):
        r = _check_positive_length(r)
        return _unwrap(self.alpha * r ** (1.0 - self.a) / (self.a - 1.0))

    def derivative(self, r):
        """``df/dr``; used by the oracle and the integrator's time-step scale."""
        r = _check_positive_length(r)
        return _unwrap(-self.a * self.alpha * r ** (-self.a - 1.0))

    def scalar_ops(self):
        """Plain-float ``(f, f_inverse)`` pair for tight sequential loops."""
        alpha, a = self.alpha, self.a
        neg_inv_a = -1.0 / a
        if alpha == 1.0:
            return (lambda r: r ** -a), (lambda y: y ** neg_inv_a)
        return (lambda r: alpha * r ** -a), (lambda y: (y / alpha) ** neg_inv_a)

    def to_dict(self):
        return {"kind": "power", "alpha": self.alpha, "a": self.a}


@dataclass(frozen=True)
class TabulatedLaw:
    """Piecewise-linear force law through samples ``(r_i, f_i)``.

    ``r`` must be strictly increasing and ``f`` strictly decreasing and
    positive. ``tail`` is ``V(r_max)``; the potential inside the table is
    the exact integral of the interpolant from ``r`` to ``r_max``.
    """

    points: tuple = field(default=())
    tail: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise DomainError("a tabulated law needs at least two (r, f) pairs")
        r, f = pts[:, 0], pts[:, 1]
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise DomainError("tabulated r must be positive and strictly increasing")
        if np.any(f <= 0) or np.any(np.diff(f) >= 0):
            raise DomainError("tabulated f must be positive and strictly decreasing")
        object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))
        object.__setattr__(self, "_r", r)
        object.__setattr__(self, "_f", f)
        # V(r_i) = tail + integral_{r_i}^{r_max} f
        seg = 0.5 * (f[1:] + f[:-1]) * np.diff(r)
        v = self.tail + np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        object.__setattr__(self, "_v", v)

    def _check_r(self, r):
        r = _check_positive_length(r)
        if np.any(r < self._r[0]) or np.any(r > self._r[-1]):
            raise RangeError(f"distance outside tabulated range [{self._r[0]}, {self._r[-1]}]")
        return r

    def force(self, r):
        r = self._check_r(r)
        return _unwrap(np.interp(r, self._r, self._f))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(~(y > 0)):
            raise DomainError("f is strictly positive; no distance produces a non-positive force")
        if np.any(y > self._f[0]) or np.any(y < self._f[-1]):
            raise RangeError(f"force outside tabulated range [{self._f[-1]}, {self._f[0]}]")
        # the interpolant is linear on each segment, so invert it there exactly
        return _unwrap(np.interp(-y, -self._f, self._r))

    def potential(self, r):
        r = self._check_r(r)
        i = np.clip(np.searchsorted(self._r, r, side="right") - 1, 0, len(self._r) - 2)
        fr = np.interp(r, self._r, self._f)
        # integral from r to the right end of its segment, then the stored tail
        partial = 0.5 * (fr + self._f[i + 1]) * (self._r[i + 1] - r)
        return _unwrap(partial + self._v[i + 1])

    def derivative(self, r):
        r = self._check_r(r)
        i = np.clip(np.searchsorted(self._r, r, side="right") - 1, 0, len(self._r) - 2)
        return _unwrap((self._f[i + 1] - self._f[i]) / (self._r[i + 1] - self._r[i]))

    def scalar_ops(self):
        return (lambda r: float(self.force(r))), (lambda y: float(self.inverse(y)))

    def to_dict(self):
        return {"kind": "table", "points": [list(p) for p in self.points], "tail": self.tail}


PairLaw = PowerLaw | TabulatedLaw


def force_pair(law, r):
    """Pair force ``f(r)``. Raises :class:`DomainError` for ``r <= 0``."""
    return law.force(r)


def inverse_force(law, y):
    """Distance ``r`` with ``f(r) = y``."""
    return law.inverse(y)


def pair_potential(law, r):
    """Pair potential ``V(r)``, normalised so that ``V(inf) = 0`` for power laws."""
    return law.potential(r)


def law_from_dict(spec):
    """Build a law from the config ``pair_law`` object."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "power":
        allowed = {"a", "alpha"}
        cls = PowerLaw
    elif kind == "table":
        allowed = {"points", "tail"}
        cls = TabulatedLaw
    else:
        raise DomainError(f"unknown pair_law kind {kind!r}")
    unknown = set(spec) - allowed
    if unknown:
        raise DomainError(f"unknown pair_law keys: {sorted(unknown)}")
    if kind == "table":
        spec["points"] = tuple(tuple(p) for p in spec.get("points", ()))
    return cls(**spec)
