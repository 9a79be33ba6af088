"""Tests for nonlinearity families, antiderivatives and monotonicity checks"""

import math

import numpy as np
import pandas as pd
import pytest

from modules.errors import DomainError, PreconditionError
from modules.nonlinearity import (
    Nonlinearity,
    antiderivative_by_quadrature,
    check_shift_monotone,
    evaluate,
    lipschitz_envelope,
    lipschitz_profile,
    load_table,
    positivity_threshold,
    sampling_chunks,
    sine_moment,
)

CLOSED_FORM_FAMILIES = [
    Nonlinearity.power(3),
    Nonlinearity.power(0.5),
    Nonlinearity.oscillatory_power(2),
    Nonlinearity.oscillatory_power(3),
    Nonlinearity.exponential(1),
    Nonlinearity.oscillatory_exponential(1),
]


def write_table(path, ts, fs):
    path.write_text("t,f\n" + "".join(f"{float(t)!r},{float(v)!r}\n" for t, v in zip(ts, fs)))
    return str(path)


class TestEvaluate:
    def test_power_values(self):
        assert evaluate(Nonlinearity.power(3), 2.0) == pytest.approx((8.0, 12.0, 4.0), rel=1e-14)

    def test_power_at_zero(self):
        f, df, F = evaluate(Nonlinearity.power(3), 0.0)
        assert (f, df, F) == (0.0, 0.0, 0.0)

    def test_negative_argument_is_domain_error(self):
        with pytest.raises(DomainError):
            Nonlinearity.power(3).value(-1.0)

    def test_invalid_parameters(self):
        with pytest.raises(PreconditionError):
            Nonlinearity.power(0)
        with pytest.raises(PreconditionError):
            Nonlinearity.exponential(-1.0)
        with pytest.raises(PreconditionError):
            Nonlinearity(family='cubic', q=3.0)

    def test_vectorized_evaluation_matches_scalar(self):
        f = Nonlinearity.oscillatory_power(3)
        ts = np.array([1.0, 5.0, 20.0])
        assert np.allclose(f.value(ts), [f.value(t) for t in ts], rtol=1e-15)
        assert np.allclose(f.antiderivative(ts), [f.antiderivative(t) for t in ts], rtol=1e-14)

    @pytest.mark.parametrize('f', CLOSED_FORM_FAMILIES, ids=lambda f: f.label)
    @pytest.mark.parametrize('t', [7.5, 30.0])
    def test_closed_form_antiderivative_matches_quadrature(self, f, t):
        value, _ = antiderivative_by_quadrature(f, t)
        assert f.antiderivative(t) == pytest.approx(value, rel=1e-9)

    @pytest.mark.parametrize('f', CLOSED_FORM_FAMILIES, ids=lambda f: f.label)
    def test_log_antiderivative(self, f):
        t = 12.0
        assert f.log_antiderivative(t) == pytest.approx(math.log(f.antiderivative(t)), rel=1e-12)

    def test_log_antiderivative_does_not_overflow(self):
        f = Nonlinearity.exponential(2.0)
        assert f.log_antiderivative(1000.0) == pytest.approx(2000.0 - math.log(2.0), rel=1e-12)

    def test_finite_difference_derivative(self):
        closed = Nonlinearity.oscillatory_power(3)
        fd = Nonlinearity(family='oscillatory_power', q=3.0, derivative_mode='finite_difference')
        for t in (0.5, 5.0, 40.0):
            assert fd.derivative(t) == pytest.approx(closed.derivative(t), rel=1e-6)


class TestSineMoment:
    @staticmethod
    def exact_q2(t):
        return -t * t * math.cos(t) + 2.0 * t * math.sin(t) + 2.0 * math.cos(t) - 2.0

    @pytest.mark.parametrize('t', [0.5, 1.9, 10.0, 250.0])
    def test_integer_exponent(self, t):
        assert sine_moment(2.0, t) == pytest.approx(self.exact_q2(t), rel=1e-10, abs=1e-12)

    def test_fractional_exponent_against_quadrature(self):
        f = Nonlinearity.oscillatory_power(2.5)
        value, _ = antiderivative_by_quadrature(f, 60.0)
        assert f.antiderivative(60.0) == pytest.approx(value, rel=1e-9)


class TestTabulated:
    def test_linear_table_is_integrated_exactly(self, tmp_path):
        ts = np.linspace(0.0, 10.0, 11)
        f = Nonlinearity.from_csv(write_table(tmp_path / 'f.csv', ts, 2.0 * ts))
        assert f.antiderivative(3.0) == pytest.approx(9.0, rel=1e-14)
        assert f.antiderivative(2.5) == pytest.approx(6.25, rel=1e-14)
        assert f.table_error_bound(10.0) == pytest.approx(0.0, abs=1e-12)

    def test_outside_table_is_domain_error(self, tmp_path):
        ts = np.linspace(1.0, 10.0, 10)
        f = Nonlinearity.from_csv(write_table(tmp_path / 'f.csv', ts, ts ** 2))
        assert f.missing_mass
        with pytest.raises(DomainError):
            f.value(11.0)

    def test_missing_column(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text("x,y\n0,1\n1,2\n")
        with pytest.raises(PreconditionError):
            load_table(str(path))

    def test_table_written_by_pandas(self, tmp_path):
        ts = np.linspace(0.0, 4.0, 9)
        path = tmp_path / 'f.csv'
        pd.DataFrame({'t': ts, 'f': ts ** 3}).to_csv(path, index=False)
        f = Nonlinearity.from_csv(str(path))
        assert f.value(2.0) == pytest.approx(8.0, rel=1e-14)
        assert f.domain == (0.0, 4.0)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / 'f.csv'
        path.write_text("t,f\n0.0,0.0\nnp.float64(1.0),np.float64(1.0)\n")
        with pytest.raises(PreconditionError, match='data row 2'):
            load_table(str(path))

    def test_threshold_after_last_negative_sample(self, tmp_path):
        ts = np.arange(0.0, 101.0)
        f = Nonlinearity.from_csv(write_table(tmp_path / 'f.csv', ts, ts - 5.0))
        assert positivity_threshold(f) == 6.0

    def test_negative_at_end_of_table(self, tmp_path):
        ts = np.arange(0.0, 11.0)
        f = Nonlinearity.from_csv(write_table(tmp_path / 'f.csv', ts, 5.0 - ts))
        with pytest.raises(DomainError):
            positivity_threshold(f)


class TestPositivityThreshold:
    @pytest.mark.parametrize('f', CLOSED_FORM_FAMILIES, ids=lambda f: f.label)
    def test_positive_families(self, f):
        assert 0.0 < positivity_threshold(f) <= 1e-2


class TestSamplingChunks:
    def test_chunks_cover_window(self):
        f = Nonlinearity.oscillatory_power(2)
        chunks = list(sampling_chunks(f, 1.0, 100.0))
        assert chunks[0][0] == 1.0
        assert chunks[-1][-1] == 100.0
        assert all(np.all(np.diff(c) > 0) for c in chunks)
        assert np.max(np.diff(chunks[0])) <= 2.0 * math.pi / 64 + 1e-12

    def test_empty_window(self):
        with pytest.raises(PreconditionError):
            next(sampling_chunks(Nonlinearity.power(2), 5.0, 5.0))


class TestShiftMonotone:
    def test_power_is_monotone_without_shift(self):
        assert check_shift_monotone(Nonlinearity.power(3), K=0.0).holds

    def test_oscillatory_power_needs_a_shift(self):
        f = Nonlinearity.oscillatory_power(3)
        verdict = check_shift_monotone(f, K=0.0, p=1.0, window=(1e2, 1e4))
        assert not verdict.holds
        assert 1e2 <= verdict.witness <= 1e4
        assert f.derivative(verdict.witness) < 0

    def test_oscillatory_power_with_quartic_shift(self):
        verdict = check_shift_monotone(Nonlinearity.oscillatory_power(3), K=1.0, p=5.0, window=(1e2, 1e4))
        assert verdict.holds
        assert verdict.witness is None
        assert verdict.min_slope > 0

    def test_oscillatory_cubic_with_quarter_quartic_shift(self):
        # f' + t³ = 3t²(1 + sin t) + t³(1 + cos t) ≥ 0
        verdict = check_shift_monotone(Nonlinearity.oscillatory_power(3), K=0.25, p=4.0, window=(1.0, 1e4))
        assert verdict.holds
        assert verdict.min_slope > 0

    def test_larger_shift_keeps_monotonicity(self):
        f = Nonlinearity.oscillatory_power(3)
        verdicts = [check_shift_monotone(f, K=K, p=4.0, window=(1.0, 1e4)) for K in (0.25, 0.5, 2.0)]
        assert all(v.holds for v in verdicts)
        slopes = [v.min_slope for v in verdicts]
        assert slopes == sorted(slopes)

    def test_exponential_shift(self):
        f = Nonlinearity.oscillatory_exponential(1)
        assert check_shift_monotone(f, K=1.0, window=(1.0, 50.0), shift='exponential', alpha=1.0).holds
        assert not check_shift_monotone(f, K=0.0, window=(1.0, 50.0), shift='exponential', alpha=1.0).holds

    def test_invalid_arguments(self):
        f = Nonlinearity.power(3)
        with pytest.raises(PreconditionError):
            check_shift_monotone(f, K=-1.0)
        with pytest.raises(PreconditionError):
            check_shift_monotone(f, K=1.0, window=(0.0, 10.0))
        with pytest.raises(PreconditionError):
            check_shift_monotone(f, K=1.0, shift='exponential')


class TestLipschitz:
    def test_power_envelope(self):
        assert lipschitz_envelope(Nonlinearity.power(3), 1.0, 10.0) == pytest.approx(300.0, rel=1e-12)

    def test_envelope_at_left_end(self):
        assert lipschitz_envelope(Nonlinearity.power(3), 2.0, 2.0) == pytest.approx(12.0, rel=1e-14)

    def test_profile_is_nondecreasing_and_unordered_input(self):
        f = Nonlinearity.oscillatory_power(2)
        ts = np.array([50.0, 5.0, 20.0, 100.0])
        logs = lipschitz_profile(f, 1.0, ts)
        order = np.argsort(ts)
        assert np.all(np.diff(logs[order]) >= 0)
        assert logs[1] == pytest.approx(math.log(lipschitz_envelope(f, 1.0, 5.0)), rel=1e-3)

    def test_upper_limit_below_start(self):
        with pytest.raises(PreconditionError):
            lipschitz_envelope(Nonlinearity.power(3), 2.0, 1.0)


class TestSerialization:
    def test_to_dict(self):
        data = Nonlinearity.exponential(2.0).to_dict()
        assert data['family'] == 'exponential'
        assert data['alpha'] == 2.0
