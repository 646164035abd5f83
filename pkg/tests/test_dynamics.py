import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpwave.dynamics import (
    CURRENCY,
    SECOND,
    SHARE,
    DynamicsProfile,
    Quantity,
    check_eigenvalue_identity,
    check_energy_hypothesis,
    compute_profile,
)
from vpwave.errors import DimensionMismatch, InvalidParameters, NotBesselFit
from vpwave.fitting import fit
from vpwave.marketdata import VolumeAtPrice, build_distribution
from vpwave.models import ModelSpec
from vpwave.synth import SynthConfig, coherent_dwell_times, energy_balanced_distribution, generate

BESSEL = ModelSpec("bessel", {"C": 1.0, "omega": 5.0, "p0": 10.0})


def bessel_dist(span=14400.0):
    cfg = SynthConfig(BESSEL, "0.01", ("9.70", "10.29"), 10**9, 5000, session_s=span)
    return build_distribution(generate(cfg))


def test_defining_formulas():
    dist = VolumeAtPrice.from_prices(["10.00", "20.00"], [1000, 3000], "0.01", 100.0)
    prof = DynamicsProfile.from_parameters(dist, 0.0, 10.0)
    assert prof.volume_liquidity.value.tolist() == [10.0, 30.0]
    assert prof.volume_acceleration.value.tolist() == [0.1, 0.3]
    assert prof.transaction_energy.value.tolist() == [1.0, 6.0]
    assert prof.amount_liquidity.value.tolist() == [100.0, 600.0]
    assert prof.volume_liquidity.dim == SHARE / SECOND
    assert prof.transaction_energy.dim == SHARE * CURRENCY / SECOND**2


def test_energy_example_and_full_share_level():
    dist = VolumeAtPrice.from_prices(["10.00"], [200], "0.01", 10.0)
    prof = DynamicsProfile.from_parameters(dist, 0.0, 10.0)
    assert prof.volume_acceleration.value[0] == 2.0
    assert prof.transaction_energy.value[0] == 20.0
    assert prof.restoring_force.value[0] == 0.0
    assert check_energy_hypothesis(prof, dist)[0] == 0.0


@given(
    st.lists(st.integers(0, 10**6), min_size=1, max_size=40).filter(lambda v: sum(v) > 0),
    st.floats(1.0, 1e5),
)
@settings(max_examples=100, deadline=None)
def test_force_identity_and_time_scaling(vols, span):
    prices = [f"{10 + 0.01 * i:.2f}" for i in range(len(vols))]
    dist = VolumeAtPrice.from_prices(prices, vols, "0.01", span)
    prof = DynamicsProfile.from_parameters(dist, 0.0, 10.0)
    lhs = (prof.transaction_force + prof.restoring_force).value
    rhs = prof.omega_sq_check.value
    assert np.all(np.abs(lhs - rhs) <= 4 * np.spacing(np.maximum(np.abs(rhs), prof.volume_acceleration.value)))
    doubled = DynamicsProfile.from_parameters(VolumeAtPrice.from_prices(prices, vols, "0.01", 2 * span), 0.0, 10.0)
    assert np.array_equal(doubled.volume_liquidity.value, prof.volume_liquidity.value / 2)
    for name in ("volume_acceleration", "transaction_energy", "restoring_force", "transaction_force"):
        assert np.allclose(getattr(doubled, name).value, getattr(prof, name).value / 4, rtol=1e-15, atol=0)


def test_dimension_checks():
    v = Quantity([1.0], SHARE)
    p = Quantity([1.0], CURRENCY)
    with pytest.raises(DimensionMismatch):
        v + p
    with pytest.raises(DimensionMismatch):
        v - 1.0
    assert (v * p).dim == SHARE * CURRENCY
    assert str(SHARE / SECOND**2) == "share*s^-2"


def test_energy_hypothesis_on_constructed_data():
    prices = np.round(np.arange(1001, 1041) * 0.01, 2)
    dist, a = energy_balanced_distribution(prices, 10.0, session_span=3600.0, total_volume=2e6)
    prof = DynamicsProfile.from_parameters(dist, a, 10.0)
    assert np.max(np.abs(check_energy_hypothesis(prof, dist))) <= 1e-9


def test_energy_hypothesis_on_arbitrary_data_is_finite():
    dist = bessel_dist()
    prof = compute_profile(dist, fit(dist, "bessel"))
    r = check_energy_hypothesis(prof, dist)
    assert r.shape == (60,) and np.all(np.isfinite(r))
    other = VolumeAtPrice.from_prices(["1.00", "1.01"], [1, 1])
    with pytest.raises(InvalidParameters):
        check_energy_hypothesis(prof, other)


def test_eigenvalue_identity_on_coherent_data():
    dist = bessel_dist()
    t = coherent_dwell_times(dist, 5.0)
    check = check_eigenvalue_identity(dist, 5.0, t)
    assert check.dispersion <= 1e-9
    assert check.max_deviation <= 1e-9 * check.omega_sq
    doubled = check_eigenvalue_identity(dist, 10.0, t)
    assert doubled.max_deviation > check.max_deviation


def test_eigenvalue_identity_session_span_is_diagnostic():
    dist = bessel_dist()
    check = check_eigenvalue_identity(dist, 5.0)
    assert check.dispersion > 0.5  # a shared span makes (v/V) v_tt follow v^2
    assert check.a_estimate == pytest.approx(np.mean(dist.volumes / dist.session_span**2) - 25.0)


def test_eigenvalue_identity_single_level():
    dist = VolumeAtPrice.from_prices(["10.00"], [400], "0.01", 10.0)
    check = check_eigenvalue_identity(dist, 3.0)
    assert check.a_estimate == 4.0 - 9.0
    assert check.dispersion == 0.0


def test_compute_profile_requires_bessel():
    dist = bessel_dist()
    prof = compute_profile(dist, fit(dist, "bessel"))
    assert prof.n_levels == 60 and prof.p0 == pytest.approx(10.0, abs=1e-8)
    assert prof.potential.dim == CURRENCY / SECOND**2
    with pytest.raises(NotBesselFit):
        compute_profile(dist, ModelSpec("kummer", {"C": 1.0, "m": 1, "A": 1.0, "p0": 10.0}))
    with pytest.raises(InvalidParameters):
        compute_profile(dist, BESSEL, times=np.ones(3))


def test_profile_csv_has_units_row():
    dist = bessel_dist()
    buf = io.StringIO()
    compute_profile(dist, BESSEL).write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("price,v_t,v_tt,E")
    assert lines[1].split(",")[:3] == ["currency", "share*s^-1", "share*s^-2"]
    assert len(lines) == 62
