"""Shared generators for the test suite."""
import numpy as np

from strongchain import PiecewiseLinearField


def random_nonincreasing_field(rng, length=1.0, knots=6, scale=2.0):
    xs = np.linspace(0.0, length, knots)
    start = rng.uniform(-scale, scale)
    drops = rng.uniform(0.0, scale / knots, size=knots - 1)
    fs = start - np.concatenate([[0.0], np.cumsum(drops)])
    return PiecewiseLinearField(tuple(zip(xs.tolist(), fs.tolist())), monotone_nonincreasing=True)
