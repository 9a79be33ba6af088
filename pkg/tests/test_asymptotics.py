"""Tests for ψ, φ and the growth-hypothesis limit checks"""

import math

import numpy as np
import pytest

from modules.asymptotics import (
    GrowthProfile,
    InverseTable,
    asymptotics_table,
    check_condition_exp,
    check_condition_h2,
    check_gamma_conditions,
    check_phi_psi_inequality,
    keller_osserman,
    phi,
    psi,
    psi_inverse,
)
from modules.errors import DivergenceError, DomainError, PreconditionError
from modules.nonlinearity import Nonlinearity


def psi_power(q, t):
    return math.sqrt(2.0 * (q + 1.0)) / (q - 1.0) * t ** (-(q - 1.0) / 2.0)


def phi_power(q, t):
    return (q + 1.0) / (q * t ** q)


class TestClosedForms:
    @pytest.mark.parametrize('q', [2.0, 3.0, 5.0])
    @pytest.mark.parametrize('t', [10.0, 1e2, 1e3])
    def test_power_psi_and_phi(self, q, t):
        gp = GrowthProfile(Nonlinearity.power(q), quad_rel_tol=1e-11)
        assert psi(gp, t) == pytest.approx(psi_power(q, t), rel=1e-8)
        assert phi(gp, t) == pytest.approx(phi_power(q, t), rel=1e-8)

    def test_psi_beyond_tail_cap(self, power3):
        t = 1e10
        assert power3.psi(t) == pytest.approx(psi_power(3.0, t), rel=1e-8)

    def test_exponential_psi(self):
        # F ≈ e^{αt}/α, so ψ(t) ≈ √(2/α)·e^{-αt/2}
        alpha = 2.0
        gp = GrowthProfile(Nonlinearity.exponential(alpha))
        t = 200.0
        expected = 0.5 * math.log(2.0 / alpha) - 0.5 * alpha * t
        assert gp.log_psi(t) == pytest.approx(expected, rel=1e-9)

    def test_vectorized_matches_pointwise(self, power3):
        ts = np.array([1e3, 20.0, 300.0])
        assert np.allclose(power3.psi_many(ts), [power3.psi(t) for t in ts], rtol=1e-8)
        assert np.allclose(power3.phi_many(ts), [power3.phi(t) for t in ts], rtol=1e-8)

    def test_psi_detail_adds_up(self, power3):
        detail = power3.psi_detail(50.0)
        assert detail['raw'] + detail['tail'] == pytest.approx(detail['value'], rel=1e-10)
        assert detail['error_estimate'] >= 0

    def test_psi_below_t0(self, power3):
        with pytest.raises(DomainError):
            power3.psi(power3.t0 / 2.0)

    def test_phi_below_t0_is_clamped(self, power3):
        assert power3.phi(power3.t0 / 2.0) == power3.phi(power3.t0)

    def test_divergent_integral(self):
        gp = GrowthProfile(Nonlinearity.power(1.0))
        with pytest.raises(DivergenceError):
            gp.psi(10.0)

    def test_invalid_tolerance(self):
        with pytest.raises(PreconditionError):
            GrowthProfile(Nonlinearity.power(3), quad_rel_tol=0.0)


class TestOscillatoryQuadrature:
    # F = t⁴/4 - t³cos t + O(t²) for q = 3: ψ → √2/t and φ → 4/(3t³)
    # with relative corrections of order 1/t²

    @pytest.mark.parametrize('t', [3e3, 1e4, 1e6])
    def test_psi_follows_envelope(self, osc3, t):
        assert osc3.psi(t) == pytest.approx(math.sqrt(2.0) / t, rel=1e-6)

    @pytest.mark.parametrize('t', [3e3, 1e4])
    def test_phi_follows_envelope(self, osc3, t):
        assert osc3.phi(t) == pytest.approx(4.0 / (3.0 * t ** 3), rel=1e-5)

    def test_long_segment_uses_period_rule(self, osc3):
        anchor = float(osc3.log_F(2513.27))
        value, error = osc3._segment(2513.27, 5026.55, 0.5, anchor, 0.0)
        assert error <= 1e-9 * value
        # ∫ 2/s² over the segment, scaled by F(a)^{1/2}
        expected = 2.0 * (1.0 / 2513.27 - 1.0 / 5026.55) * math.exp(0.5 * anchor)
        assert value == pytest.approx(expected, rel=1e-5)

    def test_vectorized_matches_pointwise(self, osc3):
        ts = np.array([5e4, 200.0, 2e3, 1e5])
        assert np.allclose(osc3.psi_many(ts), [osc3.psi(t) for t in ts], rtol=1e-8)
        assert np.allclose(osc3.phi_many(ts), [osc3.phi(t) for t in ts], rtol=1e-8)

    def test_envelope_rest_from_window_means(self, osc3):
        x = 1e4
        anchor = float(osc3.log_F(x))
        rest, uncertainty = osc3._envelope_rest(x, 0.5, anchor)
        # ∫_x^∞ 2/s² scaled by F(x)^{1/2}
        assert rest == pytest.approx(2.0 / x * math.exp(0.5 * anchor), rel=1e-5)
        assert 0.0 < uncertainty < 1e-3 * rest

    def test_envelope_tail_is_reported(self, osc3):
        detail = osc3.psi_detail(1e4)
        assert detail['truncated_at'] < osc3.tail_cap
        assert detail['tail'] > 0
        assert detail['error_estimate'] <= 1e-9 * detail['value']


class TestInverse:
    @pytest.mark.parametrize('d', [0.5, 1e-3, 1e-8])
    def test_psi_inverse_round_trip(self, power3, d):
        t = psi_inverse(power3, d)
        assert power3.psi(t) == pytest.approx(d, rel=1e-10)

    def test_psi_inverse_closed_form(self, power3):
        # ψ(t) = √2/t for q = 3
        assert psi_inverse(power3, 1e-4) == pytest.approx(math.sqrt(2.0) * 1e4, rel=1e-9)

    def test_psi_inverse_out_of_range(self, power3):
        with pytest.raises(DomainError):
            psi_inverse(power3, 0.0)
        with pytest.raises(DomainError):
            psi_inverse(power3, 2.0 * power3.psi(power3.t0))

    def test_inverse_table(self, power3):
        table = InverseTable(power3, 1.0)
        d = np.array([1e-2, 1e-5, 1e-9])
        assert np.allclose(table(d), math.sqrt(2.0) / d, rtol=1e-6)


class TestKellerOsserman:
    @pytest.mark.parametrize('f', [
        Nonlinearity.power(3),
        Nonlinearity.oscillatory_power(2),
        Nonlinearity.oscillatory_power(3),
        Nonlinearity.exponential(1),
        Nonlinearity.oscillatory_exponential(1),
    ], ids=lambda f: f.label)
    def test_converges(self, f):
        estimate = keller_osserman(GrowthProfile(f))
        assert estimate.verdict == 'converges_positive'
        assert estimate.passed
        assert estimate.value > 0

    @pytest.mark.parametrize('q', [1.0, 0.5])
    def test_diverges(self, q):
        estimate = keller_osserman(GrowthProfile(Nonlinearity.power(q)))
        assert estimate.verdict == 'diverges'
        assert not estimate.passed

    def test_value_is_integral_from_t0(self, power3):
        estimate = keller_osserman(power3)
        assert estimate.value == pytest.approx(math.sqrt(2.0) * psi_power(3.0, power3.t0), rel=1e-8)


class TestGrowthConditions:
    @pytest.mark.parametrize('q', [2.0, 3.0])
    def test_oscillatory_rate(self, q):
        estimate = check_condition_h2(GrowthProfile(Nonlinearity.oscillatory_power(q)), p=q + 1.0)
        assert estimate.verdict == 'converges_to_zero'
        assert estimate.fitted_slope == pytest.approx(-(2.0 * q + 1.0) / 2.0, rel=0.05)

    @pytest.mark.parametrize('f', [
        Nonlinearity.power(3),
        Nonlinearity.oscillatory_power(2),
        Nonlinearity.oscillatory_power(3),
        Nonlinearity.exponential(1),
        Nonlinearity.oscillatory_exponential(1),
    ], ids=lambda f: f.label)
    def test_p5_passes_for_convergent_family(self, f):
        assert check_condition_h2(GrowthProfile(f), p=5.0).passed

    def test_large_p_fails(self):
        # q = 2, p = 9: t⁴·φ/√F ~ t^{1/2}
        estimate = check_condition_h2(GrowthProfile(Nonlinearity.power(2)), p=9.0)
        assert estimate.verdict == 'diverges'
        assert not estimate.passed

    def test_invalid_p(self, power3):
        with pytest.raises(PreconditionError):
            check_condition_h2(power3, p=1.0)

    def test_exponential_variant(self):
        gp = GrowthProfile(Nonlinearity.exponential(1))
        # e^{t/2}·φ/√F ~ e^{-t}
        estimate = check_condition_exp(gp, alpha=1.0)
        assert estimate.passed
        assert estimate.fitted_slope == pytest.approx(-1.0, rel=0.05)

    def test_exponential_variant_for_oscillatory_exponential(self):
        # F = e^t·(1 + (sin t - cos t)/2 + O(e^{-t})), so Q ~ e^{-t} up to a bounded factor
        estimate = check_condition_exp(GrowthProfile(Nonlinearity.oscillatory_exponential(1)), alpha=1.0)
        assert estimate.verdict == 'converges_to_zero'
        assert estimate.passed

    def test_exponential_weight_diverges_for_power_growth(self, power3):
        estimate = check_condition_exp(power3, alpha=1.0)
        assert estimate.verdict == 'diverges'
        assert not estimate.passed
        assert estimate.fitted_slope == pytest.approx(0.5, abs=0.05)

    def test_exponential_variant_fails_for_faster_weight(self):
        gp = GrowthProfile(Nonlinearity.exponential(1))
        assert not check_condition_exp(gp, alpha=4.0).passed


class TestGammaConditions:
    def test_oscillatory_cubic_with_gamma_two(self, osc3):
        c1, c2, c3 = check_gamma_conditions(osc3, 2.0)
        assert c1.passed
        assert c2.passed
        assert c3.passed

    def test_power_with_large_gamma_fails_first(self, power3):
        c1, _, _ = check_gamma_conditions(power3, 10.0)
        assert not c1.passed


class TestInequality:
    def test_phi_psi_inequality_for_power(self, power3):
        result = check_phi_psi_inequality(power3, [1.0, 10.0, 1e3, 1e5])
        assert result['holds']
        assert result['worst_ratio'] <= 1.0

    def test_no_sample_above_t0(self, power3):
        with pytest.raises(PreconditionError):
            check_phi_psi_inequality(power3, [power3.t0])


class TestTable:
    def test_columns_and_values(self, power3):
        table = asymptotics_table(power3, [10.0, 100.0], p=5.0)
        assert list(table.columns) == ['t', 'F', 'psi', 'phi', 'Q_h2', 'Q_exp']
        assert table['psi'].iloc[0] == pytest.approx(psi_power(3.0, 10.0), rel=1e-8)
        assert table['F'].iloc[1] == pytest.approx(100.0 ** 4 / 4.0, rel=1e-12)
        assert table['Q_exp'].isna().all()

    def test_to_dict(self, power3):
        data = power3.to_dict()
        assert data['t0'] == power3.t0
        assert data['nonlinearity']['family'] == 'power'
