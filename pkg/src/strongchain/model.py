"""External force fields and chain parameters."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from dataclasses import field as dc_field

import numpy as np

from .exceptions import DomainError
from .potential import PowerLaw, law_from_dict

MONOTONE_GRID = 1024


class ForceField:
    """External force ``F(x)`` on ``[0, L]``.

    Subclasses implement :meth:`__call__` (vectorised) and :meth:`antiderivative`,
    the integral of ``F`` from 0 to ``x``.
    """

    monotone_nonincreasing = False

    def __call__(self, x):
        raise NotImplementedError

    def antiderivative(self, x):
        raise NotImplementedError

    def validate_monotone(self, length, grid=MONOTONE_GRID):
        xs = np.linspace(0.0, length, grid)
        vals = np.asarray(self(xs), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DomainError("force field is not finite on [0, L]")
        if self.monotone_nonincreasing and np.any(np.diff(vals) > 1e-12 * (1 + np.abs(vals[:-1]))):
            raise DomainError("field flagged monotone_nonincreasing but increases on [0, L]")

    def is_nonincreasing(self, length, grid=MONOTONE_GRID):
        vals = np.asarray(self(np.linspace(0.0, length, grid)), dtype=float)
        return bool(np.all(np.diff(vals) <= 0))

    def is_constant(self):
        return False

    def sup(self, length, grid=MONOTONE_GRID):
        return float(np.max(self(np.linspace(0.0, length, grid))))

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class ConstantField(ForceField):
    value: float = 0.0
    monotone_nonincreasing: bool = True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.value)
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, x):
        return self.value * np.asarray(x, dtype=float)

    def is_constant(self):
        return True

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class AffineField(ForceField):
    """``F(x) = c0 + c1 * x``."""

    c0: float = 0.0
    c1: float = 0.0
    monotone_nonincreasing: bool = False

    def __call__(self, x):
        out = self.c0 + self.c1 * np.asarray(x, dtype=float)
        return float(out) if np.ndim(out) == 0 else out

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.c0 * x + 0.5 * self.c1 * x * x

    def is_constant(self):
        return self.c1 == 0

    def to_dict(self):
        return {"kind": "affine", "c0": self.c0, "c1": self.c1}


@dataclass(frozen=True)
class PiecewiseLinearField(ForceField):
    """Linear interpolation through ``(x_i, F_i)``, held constant outside the nodes."""

    points: tuple = dc_field(default=())
    monotone_nonincreasing: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
            raise DomainError("piecewise field needs at least one (x, F) pair")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise DomainError("piecewise field nodes must be strictly increasing")
        if not np.all(np.isfinite(pts)):
            raise DomainError("piecewise field values must be finite")
        object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))
        xs, fs = pts[:, 0], pts[:, 1]
        object.__setattr__(self, "_x", xs)
        object.__setattr__(self, "_f", fs)
        # cumulative trapezoid between nodes; exact for the interpolant
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (fs[1:] + fs[:-1]) * np.diff(xs))])
        object.__setattr__(self, "_cum", cum)

    def __call__(self, x):
        out = np.interp(x, self._x, self._f)
        return float(out) if np.ndim(out) == 0 else out

    def _integral_from_first(self, x):
        x = np.asarray(x, dtype=float)
        xs, fs, cum = self._x, self._f, self._cum
        if len(xs) == 1:
            return fs[0] * (x - xs[0])
        inside = np.clip(x, xs[0], xs[-1])
        i = np.clip(np.searchsorted(xs, inside, side="right") - 1, 0, len(xs) - 2)
        fx = np.interp(inside, xs, fs)
        res = cum[i] + 0.5 * (fs[i] + fx) * (inside - xs[i])
        res = res + fs[0] * np.minimum(x - xs[0], 0.0) + fs[-1] * np.maximum(x - xs[-1], 0.0)
        return res

    def antiderivative(self, x):
        return self._integral_from_first(x) - self._integral_from_first(0.0)

    def is_constant(self):
        return bool(np.all(self._f == self._f[0]))

    def to_dict(self):
        return {"kind": "piecewise", "points": [list(p) for p in self.points]}


def reflect_field(fld, length):
    """Field seen by the mirrored chain ``y = L - x``: ``G(y) = -F(L - y)``."""
    if isinstance(fld, ConstantField):
        return ConstantField(-fld.value)
    if isinstance(fld, AffineField):
        return AffineField(-(fld.c0 + fld.c1 * length), fld.c1)
    pts = [(length - x, -f) for x, f in reversed(fld.points)]
    return PiecewiseLinearField(tuple(pts))


def field_from_dict(spec):
    spec = dict(spec)
    kind = spec.pop("kind", None)
    table = {
        "constant": (ConstantField, {"value", "monotone_nonincreasing"}),
        "affine": (AffineField, {"c0", "c1", "monotone_nonincreasing"}),
        "piecewise": (PiecewiseLinearField, {"points", "monotone_nonincreasing"}),
    }
    if kind not in table:
        raise DomainError(f"unknown field kind {kind!r}")
    cls, allowed = table[kind]
    unknown = set(spec) - allowed
    if unknown:
        raise DomainError(f"unknown field keys: {sorted(unknown)}")
    if "points" in spec:
        spec["points"] = tuple(tuple(p) for p in spec["points"])
    return cls(**spec)


@dataclass(frozen=True)
class ChainParams:
    """Everything that defines a chain: size, segment, mass, damping, pair law, field."""

    n_particles: int = 3
    length: float = 1.0
    mass: float = 1.0
    damping: float = 0.0
    law: object = dc_field(default_factory=PowerLaw)
    field: ForceField = dc_field(default_factory=ConstantField)

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 2:
            raise DomainError(f"n_particles must be an integer >= 2, got {self.n_particles}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        if not self.length > 0:
            raise DomainError(f"length must be positive, got {self.length}")
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if not self.damping >= 0:
            raise DomainError(f"damping must be non-negative, got {self.damping}")
        self.field.validate_monotone(self.length)

    def with_n(self, n):
        return replace(self, n_particles=n)

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return {
            "n_particles": self.n_particles,
            "length": self.length,
            "mass": self.mass,
            "damping": self.damping,
            "pair_law": self.law.to_dict(),
            "field": self.field.to_dict(),
        }

    @classmethod
    def from_dict(cls, spec):
        spec = dict(spec)
        law = law_from_dict(spec.pop("pair_law", {"kind": "power", "a": 2.0}))
        fld = field_from_dict(spec.pop("field", {"kind": "constant", "value": 0.0}))
        unknown = set(spec) - {"n_particles", "length", "mass", "damping"}
        if unknown:
            raise DomainError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(law=law, field=fld, **spec)


def check_configuration(positions, length=None, strict=True):
    """Validate a configuration and return it as a float array.

    Positions must be non-decreasing (strictly increasing when ``strict``) and,
    if ``length`` is given, lie in ``[0, length]``.
    """
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise DomainError("a configuration needs at least two positions")
    if not np.all(np.isfinite(x)):
        raise DomainError("positions must be finite")
    gaps = np.diff(x)
    if strict and np.any(gaps <= 0):
        raise DomainError("positions must be strictly increasing (coincident particles)")
    if not strict and np.any(gaps < 0):
        raise DomainError("positions must be non-decreasing")
    if length is not None and (x[0] < 0 or x[-1] > length):
        raise DomainError(f"positions must lie in [0, {length}]")
    return x
