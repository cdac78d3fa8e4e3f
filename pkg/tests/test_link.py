import math

import numpy as np
import pytest
from scipy.integrate import quad

import fiberpert as fp
from conftest import BETA2, GAMMA, RS, ALPHA_SSMF


def test_alpha_conversion():
    # 0.2 dB/km, power convention
    a = fp.alpha_from_db_km(0.2)
    assert math.exp(-a * 100e3) == pytest.approx(10 ** (-20 / 10), rel=1e-12)


def test_span_validation():
    with pytest.raises(ValueError):
        fp.SpanSpec(0.0, 0.0, BETA2, GAMMA)
    with pytest.raises(ValueError):
        fp.SpanSpec(1e3, -1.0, BETA2, GAMMA)
    with pytest.raises(ValueError):
        fp.LinkSpec(())
    with pytest.raises(ValueError):
        fp.LinkSpec((fp.SpanSpec(1e3, 0, BETA2, 1e-3),
                     fp.SpanSpec(1e3, 0, BETA2, 2e-3)))


PS2 = 1e-24   # report accumulated dispersion in ps^2 to keep tolerances honest


def test_accumulated_dispersion_linear():
    link = fp.homogeneous_link(1, 100e3, 0.0, BETA2, GAMMA)
    assert fp.accumulated_dispersion(link, 100e3) / PS2 == \
        pytest.approx(-2100.0, rel=1e-12)
    assert fp.accumulated_dispersion(link, 0.0) == 0.0


def test_accumulated_dispersion_predispersion():
    link = fp.homogeneous_link(1, 100e3, 0.0, BETA2, GAMMA,
                               pre_dispersion=5e-24)
    assert fp.accumulated_dispersion(link, 0.0) / PS2 == pytest.approx(5.0)


def test_accumulated_dispersion_piecewise():
    spans = (fp.SpanSpec(100e3, 0.0, -21e-27, GAMMA),
             fp.SpanSpec(100e3, 0.0, -5e-27, GAMMA))
    link = fp.LinkSpec(spans)
    assert fp.accumulated_dispersion(link, 150e3) / PS2 == \
        pytest.approx(-2350.0, rel=1e-12)
    # continuity across the boundary
    eps = 1e-3
    lo = fp.accumulated_dispersion(link, 100e3 - eps)
    hi = fp.accumulated_dispersion(link, 100e3 + eps)
    assert abs(hi - lo) / PS2 < 1e-4


def test_accumulated_dispersion_range_check():
    link = fp.homogeneous_link(1, 100e3, 0.0, BETA2, GAMMA)
    with pytest.raises(ValueError):
        fp.accumulated_dispersion(link, -1.0)
    with pytest.raises(ValueError):
        fp.accumulated_dispersion(link, 100e3 + 1.0)


def test_power_profile_lossless():
    link = fp.homogeneous_link(2, 50e3, ALPHA_SSMF, BETA2, GAMMA,
                               amplification="lossless")
    z = np.linspace(0, 100e3, 11)
    assert np.allclose(fp.power_profile(link, z), 1.0)


def test_power_profile_lumped():
    link = fp.homogeneous_link(2, 100e3, ALPHA_SSMF, BETA2, GAMMA)
    # 20 dB span loss just before the amplifier
    assert fp.power_profile(link, 100e3 - 1e-3) == pytest.approx(0.01, rel=1e-4)
    # reset at the boundary and at the link end
    assert fp.power_profile(link, 100e3) == pytest.approx(1.0)
    assert fp.power_profile(link, 0.0) == 1.0
    assert fp.power_profile(link, 200e3) == pytest.approx(1.0)


def test_effective_length_lossless():
    link = fp.homogeneous_link(1, 21.71e3, 0.0, BETA2, GAMMA,
                               amplification="lossless")
    assert fp.effective_length(link) == pytest.approx(21.71e3)


def test_effective_length_ssmf_quadrature_oracle(ssmf_link):
    closed = fp.effective_length(ssmf_link)
    oracle, _ = quad(lambda z: fp.power_profile(ssmf_link, z), 0, 100e3,
                     limit=200)
    assert closed == pytest.approx(oracle, rel=1e-9)
    assert closed == pytest.approx(21.497e3, rel=1e-4)


def test_effective_length_additivity():
    one = fp.homogeneous_link(1, 100e3, ALPHA_SSMF, BETA2, GAMMA)
    ten = fp.homogeneous_link(10, 100e3, ALPHA_SSMF, BETA2, GAMMA)
    assert fp.effective_length(ten) == pytest.approx(
        10 * fp.effective_length(one), rel=1e-12)


def test_linear_transfer_unit_magnitude(ssmf_link):
    omega = 2 * np.pi * np.linspace(-40e9, 40e9, 31)
    h = fp.linear_transfer(ssmf_link, 100e3, omega)
    assert np.allclose(np.abs(h) ** 2, 1.0, atol=1e-12)
    assert fp.linear_transfer(ssmf_link, 100e3, 0.0) == pytest.approx(1.0)


def test_linear_transfer_phase():
    link = fp.homogeneous_link(1, 100e3, 0.0, BETA2, GAMMA)
    omega = 2 * np.pi * 32e9
    h = fp.linear_transfer(link, 100e3, omega)
    expect = np.exp(1j * omega**2 * 2100e-24 / 2)   # +w^2*|B|/2 at B = -2100 ps^2
    assert abs(h - expect) < 1e-10
    assert abs(abs(h) - 1.0) < 1e-12


def test_linear_transfer_lossless_everywhere(lossless_link):
    for z in (0.0, 5e3, 21.71e3):
        h = fp.linear_transfer(lossless_link, z, 2 * np.pi * 20e9)
        assert abs(h) == pytest.approx(1.0, rel=1e-12)


def test_plan_validation():
    with pytest.raises(ValueError):
        fp.ChannelPlan((fp.ChannelSpec(RS, 0.2, 1e-3, offset=1e9),), probe=0)
    with pytest.raises(ValueError):
        fp.ChannelPlan((fp.ChannelSpec(RS, 0.2, 1e-3),
                        fp.ChannelSpec(32e9, 0.2, 1e-3, offset=1e11)), probe=0)


def test_characteristic_quantities(lossless_link):
    plan = fp.ChannelPlan((fp.ChannelSpec(100e9, 0.2, 1e-3),), probe=0)
    cq = fp.characteristic_quantities(lossless_link, plan)
    assert cq.map_strength == pytest.approx(28.7, abs=0.1)

    plan64 = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, 1e-3),), probe=0)
    cq64 = fp.characteristic_quantities(lossless_link, plan64)
    assert cq64.dispersion_length == pytest.approx(1.850e3, rel=1e-3)

    plan9 = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, fp.dbm_to_watt(9.0)),),
                           probe=0)
    cq9 = fp.characteristic_quantities(lossless_link, plan9)
    assert cq9.phi_nl[0] == pytest.approx(0.168, abs=1e-3)

    # probe has no walk-off scale
    assert cq.walkoff_length[0] is None
    assert cq.map_strength_nu[0] == cq.map_strength


def test_characteristic_quantities_interferer(lossless_link):
    off = 2 * np.pi * 76.8e9
    plan = fp.ChannelPlan((fp.ChannelSpec(64e9, 0.2, 1e-3),
                           fp.ChannelSpec(64e9, 0.2, 1e-3, offset=off)),
                          probe=0)
    cq = fp.characteristic_quantities(lossless_link, plan)
    expect = 1.0 / (off * abs(BETA2) * 64e9)
    assert cq.walkoff_length[1] == pytest.approx(expect, rel=1e-12)
    assert cq.map_strength_nu[1] == pytest.approx(21.71e3 / expect, rel=1e-12)
