"""Tests for the lens width, the narrow-domain barrier and the Euler equation"""

import math

import numpy as np
import pytest

from modules.errors import DomainError, PreconditionError
from modules.maxprinciple_lab import (
    LensSpec,
    LensWidthTable,
    barrier_report,
    euler_residual,
    euler_solution,
    euler_zero_count,
    euler_zeros,
    indicial_exponents,
    lens_width,
    operator_map,
)
from modules.reports import maxprinciple_report


def expected_zeros(C0, a, b):
    A = math.sqrt(4.0 * C0 - 1.0) / 2.0
    out = []
    for k in range(200):
        x = math.exp(-(math.pi / 2.0 + k * math.pi) / A)
        if x <= a:
            break
        if x < b:
            out.append(x)
    return sorted(out)


class TestEuler:
    def test_four_zeros_for_unit_coefficient(self):
        zeros = euler_zeros(1.0, (1e-6, 0.5))
        assert len(zeros) == 4
        assert list(zeros) == sorted(zeros)
        assert np.allclose(list(zeros), expected_zeros(1.0, 1e-6, 0.5), rtol=1e-12)
        assert [k for k, _ in zeros.indexed()] == [3, 2, 1, 0]

    def test_zeros_are_roots(self):
        zeros = euler_zeros(2.0, (1e-8, 1.0))
        values = euler_solution(2.0, np.array(list(zeros)))
        assert np.all(np.abs(values) <= 1e-12)

    def test_consecutive_ratio(self):
        zeros = list(euler_zeros(1.0, (1e-9, 1.0)))
        result = euler_zeros(1.0, (1e-9, 1.0))
        ratios = np.array(zeros[:-1]) / np.array(zeros[1:])
        assert np.allclose(ratios, result.ratio, rtol=1e-10)

    def test_no_zeros_below_quarter(self):
        result = euler_zeros(0.25, (1e-6, 0.5))
        assert len(result) == 0
        assert result.exponents == (0.5, 0.5)
        assert euler_zero_count(0.2, (1e-6, 0.5)) == 0

    def test_indicial_exponents(self):
        s_minus, s_plus = indicial_exponents(0.16)
        assert s_minus == pytest.approx(0.2, rel=1e-12)
        assert s_plus == pytest.approx(0.8, rel=1e-12)
        with pytest.raises(PreconditionError):
            indicial_exponents(1.0)

    @pytest.mark.parametrize('C0', [1.0, 0.16])
    def test_residual(self, C0):
        x = np.geomspace(1e-6, 1.0, 1000)
        assert np.max(euler_residual(C0, x)) <= 1e-9

    def test_invalid_interval(self):
        with pytest.raises(PreconditionError):
            euler_zeros(1.0, (0.0, 0.5))
        with pytest.raises(PreconditionError):
            euler_zeros(1.0, (0.5, 0.1))

    def test_solution_domain(self):
        with pytest.raises(DomainError):
            euler_solution(1.0, 0.0)

    def test_rows(self):
        rows = euler_zeros(1.0, (1e-6, 0.5)).to_rows()
        assert rows[-1]['k'] == 0
        assert rows[-1]['x_k'] == pytest.approx(math.exp(-math.pi / math.sqrt(3.0)), rel=1e-14)


class TestLens:
    def test_reflection(self, power3_radial):
        ls = LensSpec(lam=0.9, radial=power3_radial)
        assert np.allclose(ls.reflect([0.95, 0.1]), [0.85, 0.1])
        assert ls.d_max == pytest.approx(0.1)

    def test_invalid_lens(self, power3_radial):
        with pytest.raises(PreconditionError):
            LensSpec(lam=1.0, radial=power3_radial)
        with pytest.raises(PreconditionError):
            LensSpec(lam=0.5, radial=power3_radial, C_H=0.0)

    def test_width_decays_like_fifth_power(self, power3_radial):
        # H = 8/(3U⁵) for q = 3 and U ≈ √2/d
        ls = LensSpec(lam=0.95, radial=power3_radial)
        d = np.array([1e-4, 1e-3])
        H = [lens_width(ls, (2.0 * ls.lam - (1.0 - di), 0.0)) for di in d]
        slope = math.log(H[1] / H[0]) / math.log(d[1] / d[0])
        assert slope == pytest.approx(5.0, rel=0.05)

    def test_reflected_point_outside_ball(self, power3_radial):
        ls = LensSpec(lam=0.5, radial=power3_radial)
        with pytest.raises(DomainError):
            lens_width(ls, (-0.5, 0.0))

    def test_table_matches_direct_evaluation(self, power3_radial):
        ls = LensSpec(lam=0.5, radial=power3_radial)
        table = LensWidthTable(power3_radial)
        for rho in (0.2, 0.95, 1.0 - 1e-5):
            direct = lens_width(ls, (1.0 - rho, 0.0))
            assert table(rho) == pytest.approx(direct, rel=1e-3)

    def test_table_range(self, power3_radial):
        table = LensWidthTable(power3_radial, d_min=1e-6)
        with pytest.raises(DomainError):
            table(1.0 - 1e-7)


class TestBarrier:
    @pytest.fixture(scope='class')
    def report(self, power3, power3_radial):
        return barrier_report(power3, power3_radial, p=4.0, lam=0.95, C0=1.0)

    def test_barrier_holds_for_cubic(self, report):
        assert report.verdict
        assert report.refined_verdict
        assert report.operator_ok
        assert report.requirement_ok

    def test_mu_and_bounds(self, report):
        assert report.mu >= 2.0 * math.sqrt(2.0)
        assert report.worst_operator <= -0.1
        assert report.max_requirement <= math.pi / 4.0
        assert report.min_omega >= math.cos(math.pi / 4.0)

    def test_default_exponent_and_note(self, report):
        assert report.exponent == 3.0
        data = report.to_dict()
        assert data['operator_exponent'] == 3.0
        assert 'U^1.5' in data['note']
        assert len(data['samples']) == len(report.samples) > 0

    def test_samples_lie_in_the_lens(self, report):
        x1 = np.array([s[0] for s in report.samples])
        x2 = np.array([s[1] for s in report.samples])
        assert np.all(x1 >= 0.95)
        assert np.all(x1 ** 2 + x2 ** 2 < 1.0)

    def test_operator_map(self, power3_radial, report):
        grid = operator_map(power3_radial, report)
        assert grid['normalized'].shape == (len(grid['d']), len(grid['t'])) == (64, 64)
        inside = np.isfinite(grid['normalized'])
        assert inside.sum() == len(report.samples)
        assert np.nanmax(grid['normalized']) == pytest.approx(report.worst_operator, rel=1e-12)

    def test_invalid_power(self, power3, power3_radial):
        with pytest.raises(PreconditionError):
            barrier_report(power3, power3_radial, p=1.0, lam=0.95, C0=1.0)

    def test_holds_closer_to_the_boundary(self, power3, power3_radial):
        report = barrier_report(power3, power3_radial, p=4.0, lam=0.99, C0=1.0)
        assert report.verdict
        assert report.refined_verdict
        assert report.max_requirement <= math.pi / 4.0

    def test_deep_lens_needs_more_phase(self, power3, power3_radial):
        # μ·U^{3/2}·δ per unit μ is U^{3/2}·H ~ U^{-7/2}: small U_λ deep in the ball
        table = LensWidthTable(power3_radial)
        deep = barrier_report(power3, power3_radial, p=4.0, lam=0.3, C0=1.0, samples=32, table=table)
        shallow = barrier_report(power3, power3_radial, p=4.0, lam=0.95, C0=1.0, samples=32, table=table)
        assert deep.max_requirement / deep.mu > 10.0 * shallow.max_requirement / shallow.mu

    def test_wide_deep_lens_fails(self, power3, power3_radial):
        report = barrier_report(power3, power3_radial, p=4.0, lam=0.3, C0=1.0, C_H=100.0, samples=32)
        assert not report.requirement_ok
        assert not report.verdict
        assert report.max_requirement > math.pi / 4.0

    def test_verdict_is_monotone_in_lambda(self, power3, power3_radial):
        table = LensWidthTable(power3_radial)
        lambdas = [0.3, 0.6, 0.8, 0.95, 0.99]
        verdicts = [
            barrier_report(power3, power3_radial, p=4.0, lam=lam, C0=1.0, samples=32, table=table).verdict
            for lam in lambdas
        ]
        assert verdicts[-1]
        # once the barrier holds it keeps holding as the plane moves out
        first = verdicts.index(True)
        assert all(verdicts[first:])

    @pytest.mark.slow
    def test_barrier_for_oscillatory_cubic(self, osc3, osc3_radial):
        assert barrier_report(osc3, osc3_radial, p=4.0, lam=0.95, C0=1.0).verdict


class TestReport:
    def test_maxprinciple_report(self, power3, power3_radial):
        report = maxprinciple_report(power3, power3_radial, p=4.0, lam=0.95, C0=1.0, samples=16)
        data = report.to_dict()
        assert data['euler_zero_count'] == 4
        assert data['parameters']['N'] == 2
        assert data['parameters']['euler_C0'] == 1.0
        assert data['barrier']['lambda'] == 0.95

    def test_separate_euler_coefficient(self, power3, power3_radial):
        report = maxprinciple_report(power3, power3_radial, p=4.0, lam=0.95, C0=1.0, samples=16, euler_C0=0.25)
        assert report.euler_zero_count == 0
