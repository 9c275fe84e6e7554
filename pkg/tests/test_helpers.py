import json

import numpy as np
import pytest

from utils.helpers import (create_output_data, ensure_file_extension, format_float,
                           parse_float_list, save_table, save_to_json, spread)


def test_parse_float_list():
    assert parse_float_list("1/8, 0.5,,2") == [0.125, 0.5, 2.0]
    assert parse_float_list("3") == [3.0]
    with pytest.raises(ValueError):
        parse_float_list("0.5,x")


@pytest.mark.parametrize('value, text', [
    (0.1, '0.10000000000000001'),
    (1.0, '1'),
    (np.float64(2.5), '2.5'),
    (3, '3'),
    (np.int64(4), '4'),
    (True, 'true'),
    (np.bool_(False), 'false'),
    ('allen_cahn', 'allen_cahn'),
])
def test_format_float(value, text):
    assert format_float(value) == text


def test_save_table_csv(tmp_path):
    path = save_table([[0.5, 1.0 / 3.0, True]], ['s', 'value', 'ok'], str(tmp_path / 'sub' / 'table'))
    assert path.endswith('table.csv')
    with open(path, encoding='utf-8') as f:
        assert f.read() == 's,value,ok\n0.5,0.33333333333333331,true\n'


def test_save_table_json(tmp_path):
    path = save_table([[0.5, np.float64(2.0)]], ['s', 'energy'], str(tmp_path / 'table'), fmt='json')
    assert path.endswith('table.json')
    with open(path, encoding='utf-8') as f:
        data = json.load(f)
    assert data['data_type'] == 'table'
    assert data['data'] == [{'s': 0.5, 'energy': 2.0}]


def test_json_handles_numpy(tmp_path):
    path = str(tmp_path / 'out.json')
    assert save_to_json({'values': np.arange(3), 'scalar': np.float32(1.5)}, path)
    with open(path, encoding='utf-8') as f:
        assert json.load(f) == {'values': [0, 1, 2], 'scalar': 1.5}


def test_create_output_data():
    data = create_output_data([{'a': 1}, {'a': 2}], 'energy_scan')
    assert data['total_count'] == 2
    assert data['data_type'] == 'energy_scan'
    assert 'timestamp' in data


def test_ensure_file_extension():
    assert ensure_file_extension('report', 'json') == 'report.json'
    assert ensure_file_extension('report.json') == 'report.json'


def test_spread():
    assert spread([1.0, 2.0, 4.0]) == 4.0
    assert spread([]) == float('inf')
    assert spread([0.0, 1.0]) == float('inf')
