import csv
import io
import json

import pytest

from critwalk.cw_cli import main


def _tail(out, *extra):
    return ['tail', '--model', 'er', '--n', '100', '--trials', '10', '--a-grid', '2', '--seed', '5',
            '--out', str(out), *extra]


def _files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_tail_smoke(tmp_path):
    assert main(_tail(tmp_path)) == 0
    assert set(_files(tmp_path)) == {'summaries.csv', 'tail.csv', 'fit.json'}

    with open(tmp_path / 'tail.csv') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['direction', 'A', 'threshold', 'trials', 'hits', 'phat', 'ci_lo', 'ci_hi']
    assert len(rows) == 2

    fit = json.loads((tmp_path / 'fit.json').read_text())
    assert fit[0]['direction'] == 'lower' and fit[0]['slope'] is None and 'error' in fit[0]


def test_tail_is_deterministic(tmp_path):
    a, b = tmp_path / 'a', tmp_path / 'b'
    assert main(_tail(a)) == 0
    assert main(_tail(b)) == 0
    assert _files(a) == _files(b)


def test_tail_workers_do_not_change_bytes(tmp_path):
    a, b = tmp_path / 'a', tmp_path / 'b'
    grid = ['--a-grid', '.5,1,2,3', '--trials', '200', '--direction', 'both']
    assert main(_tail(a, *grid, '--workers', '1')) == 0
    assert main(_tail(b, *grid, '--workers', '4')) == 0
    assert _files(a) == _files(b)


def test_tail_json_and_plot(tmp_path):
    assert main(_tail(tmp_path, '--format', 'json', '--plot', '--direction', 'both')) == 0
    assert set(_files(tmp_path)) == {'summaries.json', 'tail.json', 'fit.json', 'tail_plot.py',
                                     'tail_plot_data.json'}
    records = json.loads((tmp_path / 'tail.json').read_text())
    assert [r['direction'] for r in records] == ['lower', 'upper']
    data = json.loads((tmp_path / 'tail_plot_data.json').read_text())
    assert data['model'] == 'er' and len(data['curves']) == 2


def test_tail_invalid_configuration(tmp_path):
    assert main(['tail', '--model', 'er', '--n', '100', '--trials', '10', '--a-grid', '',
                 '--out', str(tmp_path)]) == 2
    assert main(['tail', '--model', 'regular', '--n', '101', '--d', '3', '--trials', '10', '--a-grid', '2',
                 '--out', str(tmp_path)]) == 2
    assert main(['tail', '--model', 'er', '--n', '100', '--trials', '0', '--a-grid', '2',
                 '--out', str(tmp_path)]) == 2


def test_config_file_and_seed_precedence(tmp_path, monkeypatch):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'model': 'er', 'n': 100, 'trials': 10, 'a-grid': '2', 'seed': 5}))

    direct = tmp_path / 'direct'
    assert main(_tail(direct)) == 0

    from_config = tmp_path / 'config'
    monkeypatch.setenv('CRITWALK_SEED', '99')
    assert main(['tail', '--config', str(config), '--out', str(from_config)]) == 0
    assert _files(direct) == _files(from_config)

    from_env = tmp_path / 'env'
    monkeypatch.setenv('CRITWALK_SEED', '5')
    assert main(['tail', '--model', 'er', '--n', '100', '--trials', '10', '--a-grid', '2',
                 '--out', str(from_env)]) == 0
    assert _files(direct) == _files(from_env)

    monkeypatch.setenv('CRITWALK_SEED', 'abc')
    assert main(['tail', '--model', 'er', '--n', '100', '--trials', '10', '--a-grid', '2',
                 '--out', str(tmp_path / 'bad')]) == 2


def test_bad_config_value_exits_two(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'model': 'er', 'n': 100, 'trials': 10, 'a-grid': '2', 'workers': 'many'}))
    assert main(['tail', '--config', str(config), '--out', str(tmp_path / 'out')]) == 2


def test_failure_during_run_exits_one(tmp_path, monkeypatch, capsys):
    from critwalk import cw_harness, cw_oracle
    from critwalk.cw_structs import ValidationError

    def broken(*args, **kwargs):
        raise ValidationError('No neutral space left after 3 of 7 intervals.')

    monkeypatch.setattr(cw_harness, 'run', broken)
    assert main(_tail(tmp_path)) == 1
    assert 'ValidationError' in capsys.readouterr().err

    monkeypatch.setattr(cw_oracle, 'replay_suite', broken)
    assert main(['oracle-check', '--model', 'quantum', '--count', '3']) == 1


def test_oracle_check(capsys):
    assert main(['oracle-check', '--model', 'er', '--count', '50', '--seed', '1']) == 0
    assert '50/50' in capsys.readouterr().out


def test_oracle_check_fault(capsys):
    assert main(['oracle-check', '--model', 'regular', '--count', '20', '--seed', '2', '--inject-fault']) == 1
    out = capsys.readouterr().out
    dump = json.loads(out.splitlines()[-1])
    assert {'index', 'replay', 'truth', 'instance'} <= set(dump)


def test_oracle_check_validation():
    assert main(['oracle-check', '--model', 'er', '--count', '0']) == 2
    assert main(['oracle-check', '--model', 'quantum', '--count', '3', '--inject-fault']) == 2


def test_critical(capsys):
    assert main(['critical', '--beta', '2']) == 0
    point = json.loads(capsys.readouterr().out)
    assert point['beta'] == 2. and len(point['lambdas']) == 1
    assert main(['critical', '--beta', '.5']) == 0
    assert json.loads(capsys.readouterr().out)['lambdas'] == []
    assert main(['critical', '--beta', '-1']) == 2


def _csv(out):
    return list(csv.reader(io.StringIO(out)))


def test_walk(capsys):
    assert main(['walk', '--mode', 'ballot', '--law', 'rademacher', '--horizon', '2', '--j', '1']) == 0
    rows = _csv(capsys.readouterr().out)
    assert rows[0] == ['law', 'params', 'horizon', 'j', 'trials', 'phat', 'ci_lo', 'ci_hi']
    assert float(rows[1][5]) == 0.

    assert main(['walk', '--mode', 'stay-positive', '--law', 'cut', '--d', '4', '--horizon', '10']) == 0
    assert _csv(capsys.readouterr().out)[1][:3] == ['cut', 'd=4', '10']

    assert main(['walk', '--mode', 'chernoff', '--N', '100', '--P', '.5', '--x', '15']) == 0
    rows = _csv(capsys.readouterr().out)
    assert rows[0][-1] == 'bound' and float(rows[1][-1]) == pytest.approx(.1293, abs=1e-4)

    assert main(['walk', '--mode', 'ballot', '--law', 'regular', '--d', '3', '--prob', '.9', '--j', '1']) == 2
    assert main(['walk', '--mode', 'chernoff']) == 2


def test_simplicity(capsys):
    assert main(['simplicity', '--n', '50', '--d', '3', '--trials', '200', '--seed', '1']) == 0
    rows = _csv(capsys.readouterr().out)
    assert rows[0] == ['n', 'd', 'trials', 'simple', 'frequency', 'ci_lo', 'ci_hi', 'reference', 'within_ci']
    assert float(rows[1][7]) == pytest.approx(0.1353352832366127)
    assert rows[1][8] in ('True', 'False')

    assert main(['simplicity', '--n', '50', '--d', '3', '--trials', '0']) == 2


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as e:
        main(['nonsense'])
    assert e.value.code == 2
