import numpy as np
import pytest

from strongchain import AffineField, ChainParams, ConstantField, DomainError, PiecewiseLinearField, reflect_field
from strongchain.model import check_configuration, field_from_dict


def trapezoid(f, a, b, n=200_001):
    x = np.linspace(a, b, n)
    y = f(x)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


@pytest.mark.parametrize(
    "fld",
    [
        ConstantField(1.5),
        AffineField(1.0, -2.0),
        PiecewiseLinearField(((0.2, 3.0), (0.5, -1.0), (0.9, -1.5))),
    ],
)
@pytest.mark.parametrize("x", [0.0, 0.1, 0.37, 0.95, 1.0])
def test_antiderivative_matches_quadrature(fld, x):
    expected = trapezoid(fld, 0.0, x) if x > 0 else 0.0
    assert float(fld.antiderivative(x)) == pytest.approx(expected, abs=1e-9)


def test_piecewise_constant_extension():
    fld = PiecewiseLinearField(((0.25, 2.0), (0.75, 1.0)))
    assert fld(0.0) == 2.0
    assert fld(1.0) == 1.0
    assert fld(0.5) == pytest.approx(1.5)


def test_monotone_flag_is_validated():
    with pytest.raises(DomainError):
        ChainParams(5, field=PiecewiseLinearField(((0.0, 0.0), (1.0, 1.0)), monotone_nonincreasing=True))
    ChainParams(5, field=PiecewiseLinearField(((0.0, 1.0), (1.0, 0.0)), monotone_nonincreasing=True))


@pytest.mark.parametrize("kw", [{"n_particles": 1}, {"length": 0.0}, {"mass": -1.0}, {"damping": -0.1}])
def test_params_invariants(kw):
    with pytest.raises(DomainError):
        ChainParams(**kw)


def test_params_dict_round_trip():
    p = ChainParams(7, 2.0, 1.5, 0.3, field=AffineField(1.0, -0.5))
    assert ChainParams.from_dict(p.to_dict()) == p


def test_unknown_keys_rejected():
    with pytest.raises(DomainError):
        ChainParams.from_dict({"n_particles": 3, "colour": "red"})
    with pytest.raises(DomainError):
        field_from_dict({"kind": "constant", "value": 1.0, "slope": 2.0})


@pytest.mark.parametrize(
    "fld",
    [ConstantField(2.0), AffineField(0.0, 1.0), PiecewiseLinearField(((0.0, 1.0), (0.3, 2.0), (1.0, -1.0)))],
)
def test_reflected_field_is_minus_mirror(fld):
    g = reflect_field(fld, 1.0)
    xs = np.linspace(0, 1, 17)
    assert np.allclose(g(xs), -fld(1.0 - xs), atol=1e-14)


def test_check_configuration():
    check_configuration([0.0, 0.5, 1.0], 1.0)
    with pytest.raises(DomainError):
        check_configuration([0.0, 0.5, 0.5])
    with pytest.raises(DomainError):
        check_configuration([0.0, 1.5], 1.0)
