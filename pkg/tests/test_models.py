import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpwave.errors import DegenerateCurve, InvalidParameters
from vpwave.marketdata import VolumeAtPrice
from vpwave.models import (
    Family,
    ModelSpec,
    eval_bessel_single,
    eval_kummer,
    kummer_sqrt_eigenvalue,
    kummer_wave,
    normalize_on_grid,
)
from vpwave.specfun import J0_FIRST_ZERO


def test_family_parse():
    assert Family.parse("BesselSingle") is Family.BESSEL
    assert Family.parse("kummer") is Family.KUMMER
    with pytest.raises(ValueError):
        Family.parse("gauss")


def test_spec_validation():
    with pytest.raises(InvalidParameters):
        ModelSpec("bessel", {"C": 1.0, "omega": 5.0})
    with pytest.raises(InvalidParameters):
        ModelSpec("bessel", {"C": 1.0, "omega": -5.0, "p0": 10.0})
    with pytest.raises(InvalidParameters):
        ModelSpec("kummer", {"C": 1.0, "m": 1.5, "A": 1.0, "p0": 10.0})
    with pytest.raises(InvalidParameters):
        ModelSpec("kummer", {"C": 1.0, "m": 65, "A": 1.0, "p0": 10.0})
    with pytest.raises(InvalidParameters):
        ModelSpec("bessel", {"C": 1.0, "omega": float("nan"), "p0": 10.0})


def test_superposition_centers_ordered():
    spec = ModelSpec("superposition", {"C": 1, "omega1": 3, "p01": 10.2, "omega2": 7, "p02": 9.8})
    assert spec["p01"] == 9.8 and spec["omega1"] == 7
    assert spec.n_free_params == 5


def test_json_round_trip():
    spec = ModelSpec("kummer", {"C": 2.0, "m": 3, "A": 0.25, "p0": 5.74})
    back = ModelSpec.from_json_dict(spec.to_json_dict())
    assert back.to_json_dict() == spec.to_json_dict()
    assert isinstance(back["m"], int) and back.n_free_params == 3


def test_bessel_node_and_peak():
    spec = ModelSpec("bessel", {"C": 2.0, "omega": 4.0, "p0": 10.0})
    assert spec(10.0) == 2.0
    assert spec(10.0 + J0_FIRST_ZERO / 4.0) < 1e-15
    assert eval_bessel_single(spec, 9.7) == pytest.approx(eval_bessel_single(spec, 10.3), abs=1e-15)


def test_kummer_forms():
    assert kummer_sqrt_eigenvalue(1, 3.0) == 1.0
    x = np.linspace(-3, 3, 13)
    assert np.allclose(kummer_wave(0, 2.0, x), np.exp(-2.0 * np.abs(x)))
    assert np.allclose(kummer_wave(1, 1.0, x), np.exp(-np.abs(x)) * (1 - 2 * np.abs(x)))
    spec = ModelSpec("kummer", {"C": 1.0, "m": 1, "A": 1.0, "p0": 0.0})
    assert np.all(eval_kummer(spec, x) >= 0)


def test_normalize_on_grid():
    dist = VolumeAtPrice.from_prices([f"{9.9 + 0.01 * i:.2f}" for i in range(21)], np.ones(21))
    curve = normalize_on_grid(ModelSpec("bessel", {"C": 3.0, "omega": 5.0, "p0": 10.0}), dist)
    assert curve.values.sum() == pytest.approx(1.0, abs=1e-15)
    # the only grid level sits exactly on the order-1 node, 2 sqrt(A) |p - p0| = 1
    one = VolumeAtPrice.from_prices(["0.01"], [1])
    with pytest.raises(DegenerateCurve):
        normalize_on_grid(ModelSpec("kummer", {"C": 1.0, "m": 1, "A": 2500.0, "p0": 0.0}), one)


@given(
    st.floats(0.1, 50.0),
    st.floats(5.0, 15.0),
    st.floats(-2.0, 2.0),
)
@settings(max_examples=100, deadline=None)
def test_models_depend_on_offset_only(omega, p0, delta):
    grid = p0 + np.linspace(-0.5, 0.5, 11)
    a = ModelSpec("bessel", {"C": 1.0, "omega": omega, "p0": p0})
    b = ModelSpec("bessel", {"C": 1.0, "omega": omega, "p0": p0 + delta})
    assert np.allclose(a(grid), b(grid + delta), atol=1e-9)
