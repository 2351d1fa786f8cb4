import json
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from cli import cli
from field_expr import FIGURE_ALPHAS, builtin_figure_fields

BUMP = '(1 - x - y/sqrt(3))*(x - y/sqrt(3))*(2*y/sqrt(3))'
FIG1_B = 'x/4 + y/9 - 1.3*y*(x-0.5)'


@pytest.fixture
def runner():
    return CliRunner()


def _load(path):
    return np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)


def test_table_writes_csv_and_manifest(runner, tmp_path):
    out = tmp_path / 'fig1.csv'
    result = runner.invoke(cli, ['table', '--figure', '1', '--alpha', '0.3', '--m', '6', '--out', str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding='utf-8').split('\n')
    assert lines[0] == 'x,y,value'
    assert lines[-1] == ''
    assert len(lines) - 2 == 1095
    rows = _load(out)
    keys = list(zip(rows[:, 1].tolist(), rows[:, 0].tolist()))
    assert keys == sorted(keys)

    manifest = json.loads((tmp_path / 'fig1.manifest.json').read_text())
    assert list(manifest)[:8] == [
        'command', 'f_text', 'b_text', 'alpha', 'm', 'seed', 'tool_version', 'output_files',
    ]
    assert manifest['command'] == 'table'
    assert manifest['f_text'] == 'x/4 + y/9'
    assert manifest['alpha'] == [0.3, 0.3, 0.3]
    assert manifest['m'] == 6
    assert manifest['seed'] is None
    assert manifest['output_files'] == [str(out)]


def test_table_zero_alpha_is_f(runner, tmp_path):
    out = tmp_path / 't.csv'
    result = runner.invoke(
        cli, ['table', '--f', 'x/4 + y/9', '--b', FIG1_B, '--alpha', '0', '--m', '4', '--out', str(out)]
    )
    assert result.exit_code == 0, result.output
    rows = _load(out)
    assert len(rows) == 123
    f, _ = builtin_figure_fields(1)
    assert np.allclose(rows[:, 2], f(rows[:, 0], rows[:, 1]), rtol=0, atol=1e-15)


def test_table_non_uniform_alpha(runner, tmp_path):
    out = tmp_path / 't.csv'
    result = runner.invoke(cli, ['table', '--figure', '1', '--alpha', '0.2,-0.5,0.7', '--m', '3', '--out', str(out)])
    assert result.exit_code == 0
    manifest = json.loads(out.with_suffix('.manifest.json').read_text())
    assert manifest['alpha'] == [0.2, -0.5, 0.7]


def test_table_depth_guard(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--figure', '1', '--m', '13', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 3
    assert 'depth exceeds 12' in result.stderr
    assert not (tmp_path / 'x.csv').exists()


@pytest.mark.parametrize(
    'args',
    [
        ['table', '--figure', '1', '--out', 'x.csv'],
        ['verify', 'alpha', '--figure', '1', '--beta', '0.3'],
        ['verify', 'interp', '--figure', '1'],
        ['verify', 'sweep', '--figure', '1'],
        ['figures', '--figure', '1'],
    ],
)
def test_negative_depth_is_usage_error(runner, args):
    result = runner.invoke(cli, args + ['--m', '-1'])
    assert result.exit_code == 2
    assert isinstance(result.exception, SystemExit)


def test_table_overflowing_expression(runner, tmp_path):
    result = runner.invoke(
        cli, ['table', '--f', '1e200*1e200*x', '--b', '1e200*1e200*x', '--out', str(tmp_path / 'x.csv')]
    )
    assert result.exit_code == 2
    assert 'overflows' in result.stderr


def test_table_parse_error(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--f', 'x +', '--b', 'x', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 2
    assert 'offset 3' in result.stderr


def test_table_unknown_identifier(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--f', 'z', '--b', 'z', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 2


def test_table_incompatible_base(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--f', 'x', '--b', 'x + 1', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 3
    assert 'x_1' in result.stderr


def test_table_scale_out_of_range(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--figure', '1', '--alpha', '1,0,0', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 3


def test_table_figure_excludes_expressions(runner, tmp_path):
    result = runner.invoke(cli, ['table', '--figure', '1', '--f', 'x', '--out', str(tmp_path / 'x.csv')])
    assert result.exit_code == 2


def test_table_unwritable_output(runner, tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('')
    result = runner.invoke(cli, ['table', '--figure', '1', '--m', '2', '--out', str(blocker / 'x.csv')])
    assert result.exit_code == 4


def test_eval_origin(runner):
    result = runner.invoke(cli, ['eval', '--figure', '1', '--alpha', '0', '--address', ''])
    assert result.exit_code == 0
    assert result.stdout == 'value=0 error_bound=0\n'


def test_eval_hand_computed_value(runner):
    result = runner.invoke(
        cli, ['eval', '--figure', '1', '--alpha', '0.5', '--address', '32', '--corner', '3', '--n', '40']
    )
    assert result.exit_code == 0, result.output
    value_part, bound_part = result.stdout.strip().split(' ')
    value = float(value_part.split('=')[1])
    bound = float(bound_part.split('=')[1])
    assert abs(value - 0.298784) <= 1e-5
    assert bound < 1e-10


def test_eval_bad_address(runner):
    result = runner.invoke(cli, ['eval', '--figure', '1', '--address', '4'])
    assert result.exit_code == 2


def test_verify_alpha(runner):
    result = runner.invoke(cli, ['verify', 'alpha', '--figure', '1', '--alpha', '0.1', '--beta', '0.3', '--m', '6'])
    assert result.exit_code == 0, result.output
    reports = json.loads(result.stdout)
    assert len(reports) == 1
    assert reports[0]['name'] == 'alpha-continuity'
    assert reports[0]['pass'] is True


def test_verify_base(runner):
    result = runner.invoke(
        cli,
        [
            'verify', 'base', '--figure', '1', '--alpha', '0.5',
            '--c', f'{FIG1_B} + {BUMP}',
            '--c', f'{FIG1_B} - 2*{BUMP}',
        ],
    )
    assert result.exit_code == 0, result.output
    reports = json.loads(result.stdout)
    assert [r['pass'] for r in reports] == [True, True]


def test_verify_interp_figure(runner):
    result = runner.invoke(cli, ['verify', 'interp', '--figure', '3', '--alpha', '0.9'])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)[0]
    assert report['lhs'] <= 1e-3
    assert report['rhs'] == 1e-3


def test_verify_failure_exit_code(runner):
    result = runner.invoke(
        cli, ['verify', 'interp', '--f', 'x', '--b', 'x + 1e-6*x*(1-x)', '--tol', '1e-3']
    )
    assert result.exit_code == 1
    assert json.loads(result.stdout)[0]['pass'] is False


@pytest.mark.parametrize('command', [['residual'], ['contraction', '--iters', '8'], ['sweep']])
def test_verify_other_checks(runner, command):
    result = runner.invoke(cli, ['verify', *command, '--figure', '2', '--alpha', '0.3'])
    assert result.exit_code == 0, result.output
    json.loads(result.stdout)


def test_verify_sweep_out_of_range(runner):
    result = runner.invoke(
        cli, ['verify', 'sweep', '--figure', '1', '--alpha', '0.6', '--direction', '1,0,0', '--radii', '0.5']
    )
    assert result.exit_code == 3


def _run_figures(runner, tmp_path, *extra):
    with runner.isolated_filesystem(temp_dir=tmp_path) as cwd:
        result = runner.invoke(cli, ['figures', *extra])
        assert result.exit_code == 0, result.output
        return Path(cwd) / 'figures'


def test_figures_datasets(runner, tmp_path):
    first = _run_figures(runner, tmp_path)
    second = _run_figures(runner, tmp_path, '--jobs', '4')
    csvs = sorted(p.name for p in first.glob('*.csv'))
    assert len(csvs) == 16
    assert 'fig1_alpha0.1.csv' in csvs and 'fig4_alpha0.9.csv' in csvs
    for name in sorted(p.name for p in first.iterdir()):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    for fig in (1, 2, 3, 4):
        f, _ = builtin_figure_fields(fig)
        deviations = []
        for a in FIGURE_ALPHAS:
            rows = _load(first / f'fig{fig}_alpha{a:g}.csv')
            assert len(rows) == 3282
            deviations.append(np.max(np.abs(rows[:, 2] - f(rows[:, 0], rows[:, 1]))))
        assert min(deviations) > 0
        assert max(deviations) == deviations[-1]


def test_figures_zero_alpha_override(runner, tmp_path):
    out = _run_figures(runner, tmp_path, '--figure', '1', '--alpha', '0', '--m', '5')
    rows = _load(out / 'fig1_alpha0.csv')
    assert len(rows) == 366
    f, _ = builtin_figure_fields(1)
    assert np.allclose(rows[:, 2], f(rows[:, 0], rows[:, 1]), rtol=0, atol=1e-15)
    manifest = json.loads((out / 'fig1_alpha0.manifest.json').read_text())
    assert manifest['options'] == {'figure': 1, 'render': False}


def test_chaos_command(runner, tmp_path):
    out = tmp_path / 'chaos.csv'
    args = ['chaos', '--figure', '1', '--alpha', '0.5', '--points', '100', '--out', str(out)]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == 'x,y,value,address'
    assert len(lines) == 101
    manifest = json.loads(out.with_suffix('.manifest.json').read_text())
    assert manifest['seed'] == 42
    assert manifest['options']['burn_in'] == 50
    first = out.read_bytes()
    runner.invoke(cli, args)
    assert out.read_bytes() == first
