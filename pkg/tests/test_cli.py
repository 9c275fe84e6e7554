import json

import pytest

from main import COMMANDS, build_parser, main, s_label


def run(tmp_path, *argv):
    return main(list(argv) + ['--out', str(tmp_path)])


def test_dsconst_table(tmp_path):
    assert run(tmp_path, 'dsconst', '--s', '0.5') == 0
    lines = (tmp_path / 'dsconst.csv').read_text().splitlines()
    assert lines[0] == 's,d_s,two_s_d_s,d_s_over_two_one_minus_s'
    assert lines[1] == '0.5,1,1,1'
    assert (tmp_path / 'dsconst_report.html').exists()


def test_dsconst_is_deterministic(tmp_path):
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert run(first, 'dsconst', '--s', '0.1,0.25,3/4') == 0
    assert run(second, 'dsconst', '--s', '0.1,0.25,3/4') == 0
    assert (first / 'dsconst.csv').read_bytes() == (second / 'dsconst.csv').read_bytes()


def test_dsconst_json_format(tmp_path):
    assert run(tmp_path, 'dsconst', '--s', '0.5', '--format', 'json') == 0
    data = json.loads((tmp_path / 'dsconst.json').read_text())
    assert data['total_count'] == 1
    assert data['data'][0]['d_s'] == pytest.approx(1.0)


@pytest.mark.parametrize('argv', [
    ['dsconst', '--s', '1.5'],
    ['dsconst', '--s', 'abc'],
    ['monotonicity', '--R', '4,2'],
    ['psi-scan', '--eps', '0.6'],
    ['layer', '--n', '2', '--nx', '8', '--nlambda', '8', '--R', '4'],
])
def test_configuration_errors_exit_4(tmp_path, argv):
    assert run(tmp_path, *argv) == 4
    error = json.loads((tmp_path / 'error.json').read_text())
    assert error['exit_code'] == 4
    assert error['error'] in ('ConfigError', 'DomainError')


def test_pohozaev_of_constant_field(tmp_path):
    code = run(tmp_path, 'pohozaev', '--constant', '1', '--R', '2', '--nx', '16', '--nlambda', '8')
    assert code == 0
    assert (tmp_path / 'pohozaev_report.html').exists()
    assert not (tmp_path / 'error.json').exists()


def test_monotonicity_of_constant_field(tmp_path):
    code = run(tmp_path, 'monotonicity', '--constant', '0.5', '--R', '2,4', '--s', '0.3',
               '--nx', '16', '--nlambda', '8')
    assert code == 0
    rows = (tmp_path / 'monotonicity_constant.csv').read_text().splitlines()
    assert len(rows) == 3


def test_flags_win_over_config_file(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'output': {'format': 'json'}}))
    out = tmp_path / 'out'
    assert run(out, 'dsconst', '--s', '0.5', '--config', str(config)) == 0
    assert (out / 'dsconst.json').exists()
    assert run(out, 'dsconst', '--s', '0.5', '--config', str(config), '--format', 'csv') == 0
    assert (out / 'dsconst.csv').exists()


def test_invalid_settings_exit_4(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'grid': {'nx': 2}}))
    assert run(tmp_path, 'dsconst', '--config', str(config)) == 4


def test_parser_knows_every_command():
    parser = build_parser()
    for command in ('dsconst', 'layer', 'energy-scan', 'monotonicity', 'pohozaev', 'psi-scan',
                    'compare', 'extension'):
        args = parser.parse_args([command, '--s', '0.5'])
        assert args.command == command
    with pytest.raises(SystemExit):
        parser.parse_args(['bogus'])


def test_dsconst_small_order_limit(tmp_path):
    assert run(tmp_path, 'dsconst', '--s', '0.001') == 0
    row = (tmp_path / 'dsconst.csv').read_text().splitlines()[1].split(',')
    assert float(row[2]) == pytest.approx(1.0, rel=0.01)


def test_pohozaev_of_constant_solution_on_odd_radius(tmp_path):
    assert run(tmp_path, 'pohozaev', '--constant', '-1', '--R', '5', '--nx', '20', '--nlambda', '10') == 0
    row = (tmp_path / 'pohozaev.csv').read_text().splitlines()[1].split(',')
    assert float(row[-1]) == 0.0


def test_unexpected_error_exits_1(tmp_path, monkeypatch):
    def broken(config, services):
        raise ValueError("table went missing")

    monkeypatch.setitem(COMMANDS, 'dsconst', broken)
    assert run(tmp_path, 'dsconst', '--s', '0.5') == 1
    error = json.loads((tmp_path / 'error.json').read_text())
    assert error['exit_code'] == 1
    assert error['error'] == 'UnexpectedError'
    assert error['cause'] == 'ValueError'
    assert 'table went missing' in error['message']


@pytest.mark.parametrize('s, label', [(0.3, 's0.3'), (0.25, 's0.25'), (0.5, 's0.5'), (1 / 3, 's0.333333')])
def test_s_label_is_short(s, label):
    assert s_label(s) == label


def test_layer_files_use_short_labels(tmp_path):
    # a failed sliding check still leaves the per-order files behind
    assert run(tmp_path, 'layer', '--s', '0.3', '--R', '4', '--nx', '16', '--nlambda', '8') in (0, 3)
    assert (tmp_path / 'layer_s0.3_report.json').exists()


def _csv_rows(path):
    header, *rows = path.read_text().splitlines()
    keys = header.split(',')
    return [dict(zip(keys, row.split(','))) for row in rows]


@pytest.mark.slow
def test_energy_growth_regimes(tmp_path):
    code = run(tmp_path, 'energy-scan', '--s', '0.25,0.5,0.75', '--R', '8,16,32,64')
    fits = json.loads((tmp_path / 'growth_fit.json').read_text())['data']
    assert [fit['s'] for fit in fits] == [0.25, 0.5, 0.75]
    for fit in fits:
        assert fit['meets_tolerance'], fit
    assert code == 0


@pytest.mark.slow
def test_psi_ratio_bounded_over_epsilon(tmp_path):
    code = run(tmp_path, 'psi-scan', '--s', '0.25,0.75', '--eps', '1/8,1/16,1/32,1/64')
    rows = _csv_rows(tmp_path / 'psi_scan.csv')
    assert [int(r['cells_per_unit']) for r in rows[:4]] == [32, 64, 128, 256]
    for s in ('0.25', '0.75'):
        ratios = [float(r['ratio']) for r in rows if r['s'] == s]
        assert len(ratios) == 4
        assert max(ratios) / min(ratios) <= 3.0
    assert code == 0


@pytest.mark.slow
def test_extension_constant_stable_under_halving(tmp_path):
    assert run(tmp_path, 'extension', '--s', '0.3') == 0
    rows = _csv_rows(tmp_path / 'extension.csv')
    assert len(rows) == 20
    coarse = max(float(r['ratio']) for r in rows)
    fine = max(float(r['ratio_fine']) for r in rows)
    assert max(coarse, fine) / min(coarse, fine) <= 2.0


@pytest.mark.slow
def test_comparison_matrix(tmp_path):
    assert run(tmp_path, 'compare', '--s', '0.25,0.5,0.75', '--R', '8,16,32') == 0
    rows = _csv_rows(tmp_path / 'compare.csv')
    assert len(rows) == 9
    assert all(r['minimality_ok'] == 'true' for r in rows)
