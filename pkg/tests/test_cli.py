"""End-to-end tests of the blowup-lab command line"""

import json

import pytest

from backend import EXIT_CONFIG, EXIT_FAILURE, EXIT_HYPOTHESES, EXIT_OK, build_parser, main

FAST_HYPOTHESES = ['--override', 'hypotheses.window=[100, 10000]']


def run(tmp_path, *args):
    out = tmp_path / 'out'
    code = main([*args, '--out', str(out), '--threads', '1'])
    return code, out


def manifest_names(out):
    manifest = json.loads((out / 'manifest.json').read_text())
    return {entry['name'] for entry in manifest['files']}, manifest


class TestParser:
    def test_repeatable_overrides(self):
        args = build_parser().parse_args(['radial', '--override', 'radial.N=3', '--override', 'pde.m=2'])
        assert args.command == 'radial'
        assert args.override == ['radial.N=3', 'pde.m=2']
        assert not args.verbose

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['solve'])

    @pytest.mark.parametrize('argv', [['solve'], [], ['radial', '--threads', 'two']])
    def test_usage_errors_exit_with_config_code(self, argv, capsys):
        assert main(argv) == EXIT_CONFIG
        assert 'usage: blowup-lab' in capsys.readouterr().err

    def test_help_exits_cleanly(self, capsys):
        assert main(['--help']) == EXIT_OK
        assert 'Pipeline to run' in capsys.readouterr().out


class TestExitCodes:
    def test_hypotheses_pass_for_oscillatory_cubic(self, tmp_path):
        code, out = run(tmp_path, 'hypotheses', '--override', 'nonlinearity.family=oscillatory_power',
                        *FAST_HYPOTHESES)
        assert code == EXIT_OK
        report = json.loads((out / 'hypothesis_report.json').read_text())
        assert report['theorem_applicable'] is True
        names, manifest = manifest_names(out)
        assert {'hypothesis_report.json', 'asymptotics.csv', 'asymptotics.svg'} <= names
        assert manifest['command'] == 'hypotheses'

    def test_linear_growth_fails_hypotheses(self, tmp_path, capsys):
        code, out = run(tmp_path, 'hypotheses', '--override', 'nonlinearity.q=1', *FAST_HYPOTHESES)
        assert code == EXIT_HYPOTHESES
        report = json.loads((out / 'hypothesis_report.json').read_text())
        assert report['theorem_applicable'] is False
        names, _ = manifest_names(out)
        assert 'asymptotics.csv' not in names
        assert 'Theorem applicable: False' in capsys.readouterr().out

    def test_all_stops_when_hypotheses_fail(self, tmp_path):
        code, out = run(tmp_path, 'all', '--override', 'nonlinearity.q=1', *FAST_HYPOTHESES)
        assert code == EXIT_HYPOTHESES
        names, _ = manifest_names(out)
        assert 'radial.csv' not in names

    def test_malformed_config(self, tmp_path, capsys):
        path = tmp_path / 'bad.json'
        path.write_text('{"pde": {"n_r": 8,,}}')
        code, out = run(tmp_path, 'hypotheses', '--config', str(path))
        assert code == EXIT_CONFIG
        assert 'line 1, column' in capsys.readouterr().out
        assert not out.exists()

    def test_bad_override(self, tmp_path):
        code, _ = run(tmp_path, 'radial', '--override', 'radial.N=zero')
        assert code == EXIT_CONFIG

    def test_computational_failure(self, tmp_path, capsys):
        # Tabulated f that is still negative at the end of its table
        table = tmp_path / 'f.csv'
        table.write_text('t,f\n' + ''.join(f'{t},{5 - t}\n' for t in range(11)))
        code, _ = run(tmp_path, 'hypotheses', '--override', 'nonlinearity.family=tabulated',
                      '--override', f'nonlinearity.table_path={table}')
        assert code == EXIT_FAILURE
        assert "step 'setup'" in capsys.readouterr().out


class TestSteps:
    def test_maxprinciple(self, tmp_path):
        code, out = run(tmp_path, 'maxprinciple', '--override', 'maxprinciple.samples=16')
        assert code == EXIT_OK
        rows = (out / 'euler_zeros.csv').read_text().splitlines()
        assert rows[0] == 'k,x_k'
        assert len(rows) == 5
        barrier = json.loads((out / 'barrier_report.json').read_text())
        assert barrier['barrier']['verdict'] is True
        names, _ = manifest_names(out)
        assert {'radial.csv', 'radial_report.json', 'radial.svg', 'barrier_report.json', 'euler_zeros.csv',
                'euler_solution.svg', 'barrier_operator.svg'} <= names
        svg = (out / 'barrier_operator.svg').read_text()
        assert svg.lstrip().startswith('<?xml')

    def test_radial_report(self, tmp_path):
        code, out = run(tmp_path, 'radial')
        assert code == EXIT_OK
        report = json.loads((out / 'radial_report.json').read_text())
        assert report['N'] == 2
        assert report['power_rate']['relative_error'] <= 0.02

    @pytest.mark.slow
    def test_full_pipeline(self, tmp_path):
        code, out = run(
            tmp_path, 'all', *FAST_HYPOTHESES,
            '--override', 'pde.n_r=24', '--override', 'pde.n_theta=16',
            '--override', 'pde.M_sequence=[10, 20]', '--override', 'maxprinciple.samples=16',
        )
        assert code == EXIT_OK
        names, manifest = manifest_names(out)
        assert names == {
            'hypothesis_report.json', 'asymptotics.csv', 'asymptotics.svg',
            'radial.csv', 'radial_report.json', 'radial.svg',
            'disk_solution.csv', 'disk_report.json', 'disk_solution.svg',
            'symmetry_report.json', 'symmetry.svg',
            'barrier_report.json', 'euler_zeros.csv', 'euler_solution.svg', 'barrier_operator.svg',
        }
        assert manifest['config']['pde']['n_r'] == 24

        symmetry = json.loads((out / 'symmetry_report.json').read_text())
        assert [entry['M'] for entry in symmetry['defect_by_level']] == [10, 20]
        assert 'empirical_C' in symmetry['radial_comparison']
        assert symmetry['label'].startswith('exploratory')


class TestReproducibility:
    @pytest.mark.parametrize('args', [
        pytest.param(['maxprinciple', '--override', 'maxprinciple.samples=16'], id='maxprinciple'),
        pytest.param(
            ['all', *FAST_HYPOTHESES, '--override', 'pde.n_r=24', '--override', 'pde.n_theta=16',
             '--override', 'pde.M_sequence=[10, 20]', '--override', 'maxprinciple.samples=16'],
            marks=pytest.mark.slow, id='all',
        ),
    ])
    def test_repeated_runs_are_byte_identical(self, tmp_path, args):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert main([*args, '--out', str(first), '--threads', '1']) == EXIT_OK
        assert main([*args, '--out', str(second), '--threads', '1']) == EXIT_OK

        names, manifest = manifest_names(first)
        data_files = sorted(n for n in names if n.endswith(('.csv', '.json')))
        assert data_files
        for name in data_files:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

        _, other = manifest_names(second)
        digests = {e['name']: e['sha256'] for e in manifest['files'] if not e['name'].endswith('.svg')}
        assert digests == {e['name']: e['sha256'] for e in other['files'] if not e['name'].endswith('.svg')}
