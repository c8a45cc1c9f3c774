import json

import numpy as np
import pytest

from decoupler_lab.cli import main
from decoupler_lab.operators import operator_to_json, pauli_on
from decoupler_lab.schedfmt import group_to_json
from decoupler_lab.symmetrize import collective_pauli

ECHO = 'group spin_echo;\ndt 0.005;\nerrors dephasing;\n'
TWISTED = ('group collective_pauli(2);\ndt 0.01;\nerrors independent(2);\n'
           'window slow A=heisenberg(1,2) cycles=2;\n'
           'window twisted P=halfpi_pair(1,y,2,x) A=heisenberg(1,2) cycles=2;\n')


@pytest.fixture
def prog(tmp_path):
    def write(text, name='p.pprog'):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_project_outside_centralizer(capsys):
    code, out, _ = run(capsys, 'project', '--group', 'collective_pauli(1)', '--h', 'pauli(1,1,z)')
    doc = json.loads(out)
    assert code == 0
    assert doc['verdict'] == 'not in centralizer' and doc['in_centralizer'] is False
    assert np.array_equal(np.array(doc['projection']['re']), np.zeros((2, 2)))


def test_project_inside_centralizer(capsys):
    code, out, _ = run(capsys, 'project', '--group', 'collective_pauli(2)', '--h', 'heisenberg(1,2)')
    assert json.loads(out)['in_centralizer'] is True


def test_project_json_operator(tmp_path, capsys):
    f = tmp_path / 'h.json'
    f.write_text(operator_to_json(pauli_on(1, 1, 'z')))
    code, out, _ = run(capsys, 'project', '--group', 'spin_echo', '--h', 'hz', '--json', f'hz={f}')
    assert code == 0 and json.loads(out)['projection']['re'] == [[0.0, 0.0], [0.0, 0.0]]


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, 'check', '--group', 'collective_pauli(2)', '--errors', 'independent(2)')
    assert code == 0 and json.loads(out)['correctable'] is True
    code, out, _ = run(capsys, 'check', '--group', 'spin_echo', '--errors', 'independent(1)')
    doc = json.loads(out)
    assert code == 1 and not doc['correctable']
    assert max(r['residual'] for r in doc['residuals']) == pytest.approx(np.sqrt(2))
    code, _, _ = run(capsys, 'check', '--group', 'spin_echo', '--errors', 'dephasing(1)')
    assert code == 0


def test_invalid_input_exit_two(capsys):
    code, _, err = run(capsys, 'check', '--group', 'spin_flip', '--errors', 'dephasing')
    assert code == 2 and 'spin_echo' in err
    code, _, err = run(capsys, 'project', '--group', 'spin_echo', '--h', 'pauli(1,')
    assert code == 2


def test_universality(prog, capsys):
    code, out, _ = run(capsys, 'universality', prog(TWISTED))
    doc = json.loads(out)
    assert code == 0
    assert doc['closure_dimension'] == 4 and doc['universal'] is False


def test_universality_rejects_invalid_program(prog, capsys):
    bad = 'group collective_pauli(2);\ndt 0.01;\nwindow slow A=pauli(1,z) cycles=1;\n'
    code, _, err = run(capsys, 'universality', prog(bad))
    assert code == 2
    assert '3:15: error: A=pauli(1,z) is not in centralizer of the group' in err


def test_simulate_writes_csv_and_manifest(prog, tmp_path, capsys):
    out = tmp_path / 'traj.csv'
    code, _, _ = run(capsys, '--seed', '3', 'simulate', prog(ECHO), '--bath', 'dephasing_bath(2,0.5)',
                     '--cycles', '50', '--out', str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == 'cycle_index,time,coherence' and len(lines) == 52
    assert float(lines[1].split(',')[2]) == pytest.approx(1.0)
    assert float(lines[-1].split(',')[2]) > 0.99
    man = json.loads((tmp_path / 'traj.csv.manifest.json').read_text())
    assert man['seed'] == 3 and len(man['config_hash']) == 64
    assert man['command'] == 'simulate'


def test_simulate_without_decoupling_decays(prog, tmp_path, capsys):
    out = tmp_path / 'free.csv'
    run(capsys, 'simulate', prog(ECHO), '--bath', 'dephasing_bath(2,0.5)', '--cycles', '300',
        '--no-decoupling', '--out', str(out))
    assert float(out.read_text().splitlines()[-1].split(',')[2]) < 0.9


def test_simulate_is_byte_deterministic(prog, tmp_path, capsys):
    args = ['simulate', prog(TWISTED), '--bath', 'linear_bath(1,0.2)', '--cycles', '6']
    run(capsys, *args, '--out', str(tmp_path / 'a.csv'))
    run(capsys, *args, '--out', str(tmp_path / 'b.csv'))
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    a = json.loads((tmp_path / 'a.csv.manifest.json').read_text())
    b = json.loads((tmp_path / 'b.csv.manifest.json').read_text())
    assert a['config_hash'] != b['config_hash']  # output path is part of the inputs


def test_simulate_bounds_exit_one(prog, tmp_path, capsys):
    code, _, err = run(capsys, 'simulate', prog(TWISTED), '--cycles', '3',
                       '--out', str(tmp_path / 'x.csv'))
    assert code == 1 and 'windows need 4 cycles' in err


def test_sweep_residual(prog, tmp_path, capsys):
    out = tmp_path / 's.csv'
    code, stdout, _ = run(capsys, 'sweep', prog(TWISTED), '--h', 'random_hermitian(7)',
                          '--metric', 'residual', '--tc', '0.001,0.002,0.004,0.008', '--out', str(out))
    assert code == 0
    assert json.loads(stdout)['fitted_slope'] == pytest.approx(1.0, abs=0.05)
    assert out.read_text().splitlines()[0] == 't_c,metric,value'
    side = json.loads((tmp_path / 's.csv.json').read_text())
    assert side['fitted_slope'] == pytest.approx(1.0, abs=0.05)


def test_sweep_pulse_width(prog, tmp_path, capsys):
    out = tmp_path / 'tau.csv'
    code, _, _ = run(capsys, 'sweep', prog(ECHO), '--bath', 'dephasing_bath(1)', '--metric',
                     'pulse_infidelity', '--tc', '0.02', '--tau', '0.001,0.002,0.004',
                     '--total-time', '0.2', '--out', str(out))
    assert code == 0
    assert out.read_text().splitlines()[0] == 'tau,metric,value'


def test_sweep_sync_error(prog, tmp_path, capsys):
    code, _, err = run(capsys, 'sweep', prog(ECHO), '--bath', 'dephasing_bath(1)', '--metric',
                       'infidelity', '--tc', '0.3,0.2,0.1', '--total-time', '1',
                       '--out', str(tmp_path / 'x.csv'))
    assert code == 1 and 'whole number of cycles' in err


def test_out_dir(prog, tmp_path, capsys):
    code, _, _ = run(capsys, '--out-dir', str(tmp_path / 'res'), 'simulate', prog(ECHO),
                     '--cycles', '2', '--out', 'traj.csv')
    assert code == 0 and (tmp_path / 'res' / 'traj.csv').exists()


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(['--version'])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip() == '0.1.0'


def test_project_identity_echoes_input(capsys):
    code, out, _ = run(capsys, 'project', '--group', 'identity', '--h', 'pauli(2,1,x)')
    doc = json.loads(out)
    assert code == 0 and doc['in_centralizer'] is True
    assert np.array_equal(np.array(doc['projection']['re']), pauli_on(2, 1, 'x'))


def test_project_group_json_file(tmp_path, capsys):
    f = tmp_path / 'g.json'
    f.write_text(group_to_json(collective_pauli(2)))
    code, out, _ = run(capsys, 'project', '--group', str(f), '--h', 'heisenberg(1,2)')
    assert code == 0 and json.loads(out)['in_centralizer'] is True


def test_check_errors_json_file(tmp_path, capsys):
    f = tmp_path / 'e.json'
    f.write_text('{"builtin": "independent(2)"}')
    code, _, _ = run(capsys, 'check', '--group', 'collective_pauli(2)', '--errors', str(f))
    assert code == 0


HEADER = 'group collective_pauli(2);\ndt 0.01;\n'


@pytest.mark.parametrize('windows,dim,universal', [
    ('window slow A=heisenberg(1,2) cycles=1;', 1, False),
    ('window slow A=heisenberg(1,2) cycles=1;\n'
     'window twisted P=halfpi_pair(1,y,2,x) A=heisenberg(1,2) cycles=1;', 4, False),
    ('window slow A=heisenberg(1,2) cycles=1;\n'
     + '\n'.join(f'window drift_identity B=pauli({k},{a}) cycles=1;' for k in (1, 2) for a in 'xz'),
     15, True),
])
def test_universality_examples_from_files(prog, capsys, windows, dim, universal):
    code, out, _ = run(capsys, 'universality', prog(HEADER + windows))
    doc = json.loads(out)
    assert code == 0
    assert doc['closure_dimension'] == dim and doc['universal'] is universal


def test_universality_with_schedule_file(prog, tmp_path, capsys):
    sched = tmp_path / 's.json'
    sched.write_text(json.dumps([{'scheme': 'slow', 'hamiltonian': 'heisenberg(1,2)'},
                                 {'scheme': 'drift_restored', 'hamiltonian': 'pauli(1,x)'},
                                 {'scheme': 'drift_restored', 'hamiltonian': 'pauli(2,z)'}]))
    code, out, _ = run(capsys, 'universality', prog(HEADER), '--schedule', str(sched))
    assert code == 0 and json.loads(out)['universal'] is True


def test_simulate_schedule_file_bounds(prog, tmp_path, capsys):
    sched = tmp_path / 's.json'
    sched.write_text('{"windows": [{"scheme": "slow", "hamiltonian": "heisenberg(1,2)", "cycles": 9}]}')
    code, _, err = run(capsys, 'simulate', prog(HEADER), '--schedule', str(sched), '--cycles', '5',
                       '--out', str(tmp_path / 'x.csv'))
    assert code == 1 and 'windows need 9 cycles' in err


def test_simulate_empty_schedule_identity(prog, tmp_path, capsys):
    out = tmp_path / 'id.csv'
    code, _, _ = run(capsys, 'simulate', prog(HEADER), '--cycles', '4', '--out', str(out))
    values = [float(r.split(',')[2]) for r in out.read_text().splitlines()[1:]]
    assert code == 0 and values == [1.0] * 5
