"""Tests for ExperimentConfig loading, overrides and the thread setting"""

import json

import pytest

from modules.config import (
    ExperimentConfig,
    apply_overrides,
    load_config,
    parse_override,
    resolve_threads,
)
from modules.errors import ConfigError
from modules.nonlinearity import Nonlinearity


def write(tmp_path, text, name='config.json'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadConfig:
    def test_defaults_without_file(self):
        config = load_config()
        assert config.nonlinearity.family == 'power'
        assert config.pde.M_sequence == [20.0, 40.0, 80.0]
        assert config.radial.N == 2

    def test_partial_file_keeps_defaults(self, tmp_path):
        path = write(tmp_path, json.dumps({'radial': {'N': 3}, 'output_dir': 'runs'}))
        config = load_config(path)
        assert config.radial.N == 3
        assert config.radial.eps_R == 1e-6
        assert config.output_dir == 'runs'

    def test_json_round_trip(self, tmp_path):
        original = apply_overrides(ExperimentConfig(), ['nonlinearity.family="oscillatory_power"', 'pde.m=2'])
        path = write(tmp_path, original.to_json())
        assert load_config(path) == original

    def test_syntax_error_reports_position(self, tmp_path):
        path = write(tmp_path, '{\n  "radial": {"N": 2,}\n}\n')
        with pytest.raises(ConfigError, match=r'line 2, column \d+'):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match='not found'):
            load_config(str(tmp_path / 'missing.json'))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match="section 'solver'"):
            load_config(write(tmp_path, '{"solver": {}}'))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match='n_phi'):
            load_config(write(tmp_path, '{"pde": {"n_phi": 8}}'))

    @pytest.mark.parametrize('data', [
        {'nonlinearity': {'family': 'cubic'}},
        {'nonlinearity': {'family': 'exponential'}},
        {'nonlinearity': {'family': 'tabulated'}},
        {'hypotheses': {'window': [10.0, 1.0]}},
        {'radial': {'N': 0}},
        {'pde': {'n_r': 2}},
        {'pde': {'M_sequence': []}},
        {'pde': {'lambdas': [0.5, 1.0]}},
        {'maxprinciple': {'lam': 1.2}},
        {'maxprinciple': {'euler_interval': [0.5]}},
    ])
    def test_invalid_values(self, data):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)


class TestOverrides:
    def test_parse_json_values(self):
        assert parse_override('pde.M_sequence=[10, 20]') == ('pde', 'M_sequence', [10, 20])
        assert parse_override('radial.N=3') == ('radial', 'N', 3)
        assert parse_override('nonlinearity.family=exponential') == ('nonlinearity', 'family', 'exponential')
        assert parse_override('output_dir=runs/a') == (None, 'output_dir', 'runs/a')

    @pytest.mark.parametrize('text', ['pde.n_r', 'n_r=8', 'pde.grid.n_r=8'])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_override(text)

    def test_apply_returns_new_config(self):
        base = ExperimentConfig()
        patched = apply_overrides(base, ['nonlinearity.q=2', 'output_dir=elsewhere'])
        assert patched.nonlinearity.q == 2
        assert patched.output_dir == 'elsewhere'
        assert base.nonlinearity.q == 3.0

    def test_apply_validates(self):
        with pytest.raises(ConfigError):
            apply_overrides(ExperimentConfig(), ['radial.N=-1'])
        with pytest.raises(ConfigError):
            apply_overrides(ExperimentConfig(), ['grid.n_r=8'])


class TestBuilders:
    def test_build_profile(self):
        config = apply_overrides(ExperimentConfig(), ['nonlinearity.family=exponential', 'nonlinearity.alpha=2'])
        gp = config.build_profile()
        assert gp.f == Nonlinearity.exponential(2.0)

    def test_radial_settings_carry_threads(self):
        settings = ExperimentConfig().radial_settings(threads=3)
        assert settings.threads == 3
        assert settings.eps_R == 1e-6


class TestThreads:
    def test_cli_value_wins(self, monkeypatch):
        monkeypatch.setenv('BLOWUP_LAB_THREADS', '5')
        assert resolve_threads(2) == 2

    def test_environment(self, monkeypatch):
        monkeypatch.setenv('BLOWUP_LAB_THREADS', '5')
        assert resolve_threads() == 5

    def test_invalid_environment(self, monkeypatch):
        monkeypatch.setenv('BLOWUP_LAB_THREADS', 'many')
        with pytest.raises(ConfigError):
            resolve_threads()

    def test_default_is_capped(self, monkeypatch):
        monkeypatch.setenv('BLOWUP_LAB_THREADS', '')
        monkeypatch.setattr('os.cpu_count', lambda: 64)
        assert resolve_threads() == 8

    def test_nonpositive_cli_value(self):
        with pytest.raises(ConfigError):
            resolve_threads(0)
