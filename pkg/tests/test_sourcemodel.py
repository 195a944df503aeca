import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellsim.qcore import phi_plus
from bellsim.sourcemodel import (
    ConfigError,
    DegenerateDispersionError,
    SourceParams,
    delay_sweep,
    derive_dispersion,
    p_of_tau,
    parse_source_config,
    load_source_params,
    rect,
    sigma_from_pulse_fwhm,
    state_at_delay,
    tau_for_p,
)

L, DG = 3.0, 200.0  # half window |D_G L|/2 = 300 fs


def params(kappa=1.0, d_g=DG):
    return SourceParams(crystal_length_mm=L, d_g_fs_per_mm=d_g, kappa_value=kappa)


kappas = st.floats(0, 5)
taus = st.floats(-1000, 1000)


class TestRect:
    def test_values(self):
        assert rect(0.0) == 1.0
        assert rect(0.5) == 0.0
        assert rect(-0.5) == 0.0
        assert rect(-0.49) == 1.0
        assert rect(3.0) == 0.0

    def test_vectorized(self):
        np.testing.assert_array_equal(rect([-1, 0, 0.2, 0.5]), [0, 1, 1, 0])


class TestDispersion:
    def test_equal_velocities_cancel(self):
        assert derive_dispersion(0.2, 0.2, 0.2) == (0.0, 0.0)

    def test_pump_mismatch(self):
        assert derive_dispersion(0.5, 1.0, 1.0) == (1.0, 0.0)

    def test_sign_preserved(self):
        lam, dg = derive_dispersion(1.0, 1.0, 0.5)
        assert dg == -1.0
        assert lam == pytest.approx(1.0 - 0.5 * (1.0 + 2.0))

    @pytest.mark.parametrize("u", [0.0, -1.0])
    def test_domain(self, u):
        with pytest.raises(ValueError):
            derive_dispersion(u, 1.0, 1.0)

    def test_sigma_from_fwhm(self):
        assert sigma_from_pulse_fwhm(120.0) == pytest.approx(2 * math.sqrt(2 * math.log(2)) / 120.0)
        assert sigma_from_pulse_fwhm(120.0) == pytest.approx(0.0196235, abs=1e-7)


class TestParams:
    def test_kappa_from_pump(self):
        p = SourceParams(L, DG, lambda_p_fs_per_mm=2.0, sigma_p_rad_per_fs=0.1)
        assert p.kappa == pytest.approx(0.6)

    def test_both_paths_rejected(self):
        with pytest.raises(ValueError):
            SourceParams(L, DG, lambda_p_fs_per_mm=2.0, sigma_p_rad_per_fs=0.1, kappa_value=1.0)

    def test_needs_something(self):
        with pytest.raises(ValueError):
            SourceParams(L, DG)

    def test_positive_length(self):
        with pytest.raises(ValueError):
            SourceParams(0.0, DG, kappa_value=1.0)


class TestPOfTau:
    def test_zero_delay(self):
        assert p_of_tau(0.0, params()) == 1.0

    @pytest.mark.parametrize("tau", [300.0, -300.0, 301.0, 1e6])
    def test_outside_window(self, tau):
        assert p_of_tau(tau, params()) == 0.0

    def test_quarter_window(self):
        # x = 1/4: (1 - 1/2) exp(-2 * 1/16)
        assert p_of_tau(DG * L / 4, params(1.0)) == pytest.approx(0.5 * math.exp(-1 / 8), abs=1e-15)
        assert p_of_tau(DG * L / 4, params(1.0)) == pytest.approx(0.4412485, abs=1e-7)

    def test_negative_dg(self):
        assert p_of_tau(150.0, params(d_g=-DG)) == p_of_tau(150.0, params())

    def test_degenerate(self):
        with pytest.raises(DegenerateDispersionError, match="degenerate dispersion"):
            p_of_tau(1.0, params(d_g=0.0))

    @given(taus, kappas)
    def test_bounded(self, tau, k):
        assert 0.0 <= p_of_tau(tau, params(k)) <= 1.0

    @given(taus, kappas)
    def test_even(self, tau, k):
        assert abs(p_of_tau(tau, params(k)) - p_of_tau(-tau, params(k))) <= 1e-14

    @given(taus)
    def test_triangle_without_bandwidth(self, tau):
        x = tau / (DG * L)
        tri = max(0.0, 1 - 2 * abs(x)) if abs(x) < 0.5 else 0.0
        assert abs(p_of_tau(tau, params(0.0)) - tri) <= 1e-14

    @given(kappas)
    def test_monotone_in_window(self, k):
        t = np.linspace(0, 300, 601)
        p = p_of_tau(t, params(k))
        assert np.all(np.diff(p) <= 0)


class TestTauForP:
    def test_unity(self):
        assert tau_for_p(1.0, params()) == 0.0

    def test_round_trip(self):
        assert p_of_tau(tau_for_p(0.6, params()), params()) == pytest.approx(0.6, abs=1e-9)

    def test_triangle_half(self):
        assert tau_for_p(0.5, params(0.0)) == pytest.approx(abs(DG * L) / 4, abs=1e-6)

    @pytest.mark.parametrize("p", [0.0, 1.1, -0.2])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            tau_for_p(p, params())

    @given(st.floats(1e-6, 1.0), kappas)
    def test_round_trip_property(self, p, k):
        prm = params(k)
        tau = tau_for_p(p, prm)
        assert 0.0 <= tau <= prm.half_window
        assert abs(p_of_tau(tau, prm) - p) <= 1e-9


class TestStates:
    def test_zero_delay_is_bell(self):
        assert state_at_delay(0.0, params()).allclose(phi_plus(), atol=1e-15)

    def test_edge_is_classical(self):
        np.testing.assert_array_equal(state_at_delay(400.0, params()).matrix, np.diag([0.5, 0, 0, 0.5]))

    def test_corner_coherence(self):
        rho = state_at_delay(DG * L / 4, params(1.0))
        assert rho.matrix[0, 3].real == pytest.approx(0.2206242, abs=1e-7)


class TestSweep:
    def test_single(self):
        (pt,) = delay_sweep([0.0], params())
        assert (pt.tau, pt.p) == (0.0, 1.0)

    def test_symmetric(self):
        pts = delay_sweep(np.linspace(-350, 350, 15), params())
        ps = [pt.p for pt in pts]
        assert ps == ps[::-1]
        assert len(pts) == 15

    def test_non_increasing(self):
        ps = [pt.p for pt in delay_sweep(np.linspace(0, 299, 50), params(2.0))]
        assert all(b <= a for a, b in zip(ps, ps[1:]))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            delay_sweep([0.0, math.inf], params())


MINIMAL = """\
[source]
crystal_length_mm = 3
d_g_fs_per_mm = 200
kappa = 0.8
"""


class TestConfig:
    def test_minimal(self):
        p = parse_source_config(MINIMAL)
        assert p.kappa == 0.8 and p.delay_scale == 600.0

    def test_pump_path(self):
        text = "[source]\ncrystal_length_mm = 3\nd_g_fs_per_mm = 200\nlambda_p_fs_per_mm = 100\nsigma_p_rad_per_fs = 0.01\n"
        assert parse_source_config(text).kappa == pytest.approx(3.0)

    def test_both_is_error(self):
        text = MINIMAL + "sigma_p_rad_per_fs = 0.01\n"
        with pytest.raises(ConfigError, match=r"cfg:4:"):
            parse_source_config(text, "cfg")

    def test_missing_dg(self):
        with pytest.raises(ConfigError, match="d_g_fs_per_mm"):
            parse_source_config("[source]\ncrystal_length_mm = 3\nkappa = 1\n")

    def test_bad_number_anchor(self):
        with pytest.raises(ConfigError, match=r"cfg:3: d_g_fs_per_mm is not a number"):
            parse_source_config("[source]\ncrystal_length_mm = 3\nd_g_fs_per_mm = fast\nkappa = 1\n", "cfg")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_source_config(MINIMAL + "emission_angle = 3\n")

    def test_syntax_error_anchor(self):
        with pytest.raises(ConfigError, match=r"cfg:5:"):
            parse_source_config(MINIMAL + "not a pair\n", "cfg")

    def test_load(self, tmp_path):
        f = tmp_path / "src.ini"
        f.write_text(MINIMAL)
        assert load_source_params(f).crystal_length_mm == 3.0
        with pytest.raises(ConfigError):
            load_source_params(tmp_path / "missing.ini")
