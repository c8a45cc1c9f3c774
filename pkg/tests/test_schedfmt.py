import json

from hypothesis import HealthCheck, given, settings, strategies as st
import numpy as np
import pytest

from decoupler_lab.dynamics import SimConfig, evolve_schedule, run_events
from decoupler_lab.exceptions import ArgumentError, BoundsError, SynchronizationError
from decoupler_lab.library import Ctor
from decoupler_lab.operators import dagger, embed, random_hermitian
from decoupler_lab.program import DRIFT_IDENTITY, DRIFT_RESTORED, PARALLEL_SLOW, TWISTED_SLOW
from decoupler_lab.schedfmt import (ParseError, ResolutionError, errors_from_json, errors_to_json,
                                    flatten, group_from_json, group_to_json, parse, parse_ctor,
                                    parse_ctor_list, schedule_from_json, schedule_to_json,
                                    serialize, tokenize, validate)
from decoupler_lab.symmetrize import collective_pauli, independent_errors

from conftest import X

EXAMPLE = """\
group collective_pauli(2);
dt 0.01;
errors independent(2);
window twisted P=halfpi_pair(1,y,2,x) A=heisenberg(1,2) cycles=10;
window drift_identity B=pauli(1,x) cycles=100;
"""


def test_parse_example():
    prog = parse(EXAMPLE)
    assert prog.decoupling_group.order == 4
    assert prog.cycle_spec.cycle_time == pytest.approx(0.04)
    assert [w.scheme for w in prog.schedule.windows] == [TWISTED_SLOW, DRIFT_IDENTITY]
    assert prog.schedule.total_cycles == 110
    assert prog.windows[0].binding('A') == Ctor('heisenberg', (1, 2))


def test_empty_input():
    with pytest.raises(ParseError) as info:
        parse('')
    assert str(info.value) == "1:1: expected 'group', found end of input"
    assert info.value.expected == ("'group'",)


def test_error_position_and_expected():
    with pytest.raises(ParseError) as info:
        parse('group spin_echo;\ndt 0.1\nwindow slow A=pauli(1,z) cycles=1;')
    assert (info.value.line, info.value.col) == (3, 1)
    assert "';'" in info.value.expected


def test_unknown_builtin_lists_alternatives():
    with pytest.raises(ResolutionError) as info:
        parse('group collective_pauli(2);\ndt 0.1;\nwindow slow A=heisenbrg(1,2) cycles=1;')
    msg = str(info.value)
    assert info.value.line == 3 and info.value.col == 15
    assert 'heisenberg' in msg and 'pauli' in msg


def test_wrong_binding_and_missing_binding():
    with pytest.raises(ParseError, match="does not take 'B'"):
        parse('group spin_echo;\ndt 0.1;\nwindow slow B=pauli(1,z) cycles=1;')
    with pytest.raises(ParseError, match='needs P'):
        parse('group spin_echo;\ndt 0.1;\nwindow twisted A=pauli(1,z) cycles=1;')
    with pytest.raises(ParseError, match='duplicate'):
        parse('group spin_echo;\ndt 0.1;\nwindow slow A=id A=id cycles=1;')


def test_negative_dt_rejected():
    with pytest.raises(ParseError, match='positive'):
        parse('group spin_echo;\ndt 0;')


def test_comments_and_whitespace():
    prog = parse('# header\ngroup   spin_echo ;  # trailing\n\tdt 1e-2;\n')
    assert prog.dt == 0.01
    assert serialize(prog) == 'group spin_echo;\ndt 0.01;\n'


def test_named_json_operator():
    op = embed(X, 2)
    prog = parse('group collective_pauli(2);\ndt 0.1;\nwindow drift_restored B=myop cycles=1;',
                 {'myop': op})
    assert np.array_equal(prog.window(prog.windows[0]).hamiltonian, op)


def test_parse_ctor_helpers():
    assert parse_ctor('pauli(1,1,z)') == Ctor('pauli', (1, 1, 'z'))
    assert parse_ctor_list('independent(2), pauli(2,1,z)')[1].name == 'pauli'
    with pytest.raises(ParseError):
        parse_ctor('pauli(1,')


def test_tokenize_rejects_stray_character():
    with pytest.raises(ParseError) as info:
        tokenize('group $;')
    assert (info.value.line, info.value.col) == (1, 7)


def test_serialize_canonical_binding_order():
    a = parse('group collective_pauli(2);\ndt 0.01;\n'
              'window twisted A=heisenberg(1,2) P=halfpi_pair(1,y,2,x) cycles=2;')
    text = serialize(a)
    assert 'window twisted P=halfpi_pair(1,y,2,x) A=heisenberg(1,2) cycles=2;' in text


# round trip ----------------------------------------------------------------

SITE_OPS = st.one_of(
    st.builds(lambda i, a: f'pauli({i},{a})', st.integers(1, 2), st.sampled_from('xyz')),
    st.just('heisenberg(1,2)'),
    st.builds(lambda i, a, t: f'rot({i},{a},{t!r})', st.integers(1, 2), st.sampled_from('xyz'),
              st.floats(-10, 10, allow_nan=False)),
    st.builds(lambda s: f'random_hermitian({s})', st.integers(0, 10 ** 6)),
    st.just('zero'),
)
PULSES = st.one_of(st.just('halfpi_pair(1,y,2,x)'), st.just('pauli_string(xz)'),
                   st.builds(lambda t: f'rot(2,z,{t!r})', st.floats(-4, 4, allow_nan=False)))


@st.composite
def window_text(draw):
    kw = draw(st.sampled_from(['slow', 'twisted', 'drift_identity', 'drift_restored']))
    binds = []
    if kw == 'slow':
        binds = [('A', draw(SITE_OPS))]
    elif kw == 'twisted':
        binds = [('P', draw(PULSES))]
        if draw(st.booleans()):
            binds.append(('A', draw(SITE_OPS)))
        binds = draw(st.permutations(binds))
    else:
        binds = [('B', draw(SITE_OPS))]
    body = ' '.join(f'{k}={v}' for k, v in binds)
    return f'window {kw} {body} cycles={draw(st.integers(1, 10 ** 6))};'


@st.composite
def program_text(draw):
    group = draw(st.sampled_from(['collective_pauli(2)', 'full_pauli(1)', 'identity(2)']))
    if group == 'full_pauli(1)':
        # single-qubit register
        lines = [f'group {group};', f'dt {draw(st.floats(1e-9, 1e3))!r};']
        if draw(st.booleans()):
            lines.append('errors independent, dephasing;')
        for _ in range(draw(st.integers(0, 3))):
            lines.append(f'window drift_restored B=pauli(1,{draw(st.sampled_from("xyz"))}) '
                         f'cycles={draw(st.integers(1, 100))};')
        return '\n'.join(lines)
    lines = [f'group {group};', f'dt {draw(st.floats(1e-9, 1e3))!r};']
    if draw(st.booleans()):
        lines.append('errors ' + ', '.join(draw(st.lists(
            st.sampled_from(['independent(2)', 'collective', 'pauli(1,z)']),
            min_size=1, max_size=3, unique=True))) + ';')
    lines += draw(st.lists(window_text(), max_size=5))
    sep = draw(st.sampled_from(['\n', '  ', '\n# note\n']))
    return sep.join(lines)


@settings(max_examples=150, deadline=None)
@given(text=program_text())
def test_round_trip_is_byte_stable(text):
    prog = parse(text)
    canon = serialize(prog)
    again = parse(canon)
    assert again == prog
    assert serialize(again) == canon


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_mutated_programs_only_raise_parse_errors(data):
    text = data.draw(program_text())
    chars = list(text)
    for _ in range(data.draw(st.integers(1, 4))):
        op = data.draw(st.sampled_from(['del', 'ins', 'sub']))
        pos = data.draw(st.integers(0, max(0, len(chars) - 1)))
        ch = data.draw(st.sampled_from(list('();,=#.-e0129 xyzAPBabcgw\n') + ['\x00', 'é']))
        if op == 'del' and chars:
            del chars[pos]
        elif op == 'ins':
            chars.insert(pos, ch)
        elif chars:
            chars[pos] = ch
    try:
        parse(''.join(chars))
    except ParseError:
        pass


# validation ----------------------------------------------------------------

def test_validate_clean_example():
    assert validate(parse(EXAMPLE)) == []


def test_validate_slow_outside_centralizer():
    prog = parse('group collective_pauli(2);\ndt 0.01;\nwindow slow A=pauli(1,z) cycles=5;')
    diags = validate(prog)
    assert len(diags) == 1
    d = diags[0]
    assert d.severity == 'error' and (d.line, d.col) == (3, 15)
    assert 'A=pauli(1,z) is not in centralizer of the group' in d.message


def test_validate_uncorrectable_errors():
    diags = validate(parse('group spin_echo;\ndt 0.1;\nerrors independent;'))
    assert [d.severity for d in diags] == ['error']
    assert 'not correctable' in diags[0].message


def test_validate_trivial_twist_warning():
    prog = parse('group collective_pauli(2);\ndt 0.01;\n'
                 'window twisted P=pauli_string(xx) cycles=5;')
    diags = validate(prog)
    assert [d.severity for d in diags] == ['warning']
    assert 'twist is trivial' in diags[0].message


def test_validate_non_hermitian_operand():
    prog = parse('group spin_echo;\ndt 0.1;\nwindow drift_restored B=rot(1,x,0.3) cycles=1;')
    assert any('not Hermitian' in d.message for d in validate(prog))


def test_validate_dimension_mismatch():
    prog = parse('group spin_echo;\ndt 0.1;\nwindow drift_restored B=pauli(2,1,x) cycles=1;')
    diags = validate(prog)
    assert diags[0].severity == 'error' and 'dimension' in diags[0].message


# flattening ------------------------------------------------------------------

def test_flatten_spin_echo():
    events = flatten(parse('group spin_echo;\ndt 0.5;'), 1)
    assert [e.kind for e in events] == ['segment', 'pulse', 'segment', 'pulse']
    assert [e.at for e in events] == [0.0, 0.5, 0.5, 1.0]
    assert np.array_equal(events.pulses()[0].operator, X)
    assert events.total_duration == 1.0


def test_flatten_twisted_bracketing():
    prog = parse('group collective_pauli(2);\ndt 0.01;\n'
                 'window twisted P=halfpi_pair(1,y,2,x) cycles=2;')
    events = flatten(prog, 3)
    frames = events.pulses('frame')
    T_c = prog.cycle_spec.cycle_time
    assert len(frames) == 2
    assert frames[0].at == 0.0 and frames[1].at == pytest.approx(2 * T_c)
    assert np.allclose(frames[1].operator, dagger(frames[0].operator), atol=0)
    # P precedes everything, P^dagger follows the last pulse of cycle 1
    assert events.events[0] is frames[0]
    idx = events.events.index(frames[1])
    assert events.events[idx - 1].kind == 'pulse' and events.events[idx - 1].cycle == 1
    assert events.check_cyclicity()
    assert len(events.cycle_products()) == 3


def test_flatten_bounds():
    prog = parse('group spin_echo;\ndt 0.1;\nwindow slow A=pauli(1,x) cycles=4;')
    with pytest.raises(BoundsError):
        flatten(prog, 3)


PROGRAMS = [
    EXAMPLE.replace('cycles=100', 'cycles=3').replace('cycles=10', 'cycles=2'),
    'group collective_pauli(2);\ndt 0.02;\nwindow slow A=heisenberg(1,2) cycles=2;\n'
    'window drift_restored B=pauli(2,y) cycles=1;',
    'group spin_echo;\ndt 0.05;\nwindow drift_identity B=pauli(1,y) cycles=2;',
]


@pytest.mark.parametrize('text', PROGRAMS)
@pytest.mark.parametrize('tau', [0.0, 0.003])
def test_flatten_executes_like_evolve_schedule(text, tau, rng):
    prog = parse(text)
    spec = prog.cycle_spec
    n = prog.schedule.total_cycles + 2
    H = random_hermitian(spec.dim * 2, rng)
    psi0 = np.zeros(spec.dim * 2, complex)
    psi0[0] = 1
    events = flatten(prog, n, H, pulse_width=tau)
    psi = run_events(events, psi0)
    traj = evolve_schedule(SimConfig(spec, n, psi0, tau), H, prog.schedule)
    ref = traj.final_state
    phase = np.vdot(psi, ref)
    assert abs(abs(phase) - 1) < 1e-10
    assert np.max(np.abs(psi * phase / abs(phase) - ref)) < 1e-10
    if tau == 0:
        assert np.max(np.abs(psi - ref)) < 1e-10



# JSON documents --------------------------------------------------------------

def test_group_json_round_trip():
    G = collective_pauli(2)
    inline = group_from_json(group_to_json(G))
    assert inline.order == 4
    for a, b in zip(G, inline):
        assert np.array_equal(a, b)
    assert group_from_json(group_to_json(G, 'collective_pauli(2)')).order == 4
    with pytest.raises(ArgumentError):
        group_from_json('{"name": "x"}')
    with pytest.raises(ArgumentError):
        group_from_json('not json')


def test_errors_json_round_trip():
    E = independent_errors(2)
    back = errors_from_json(errors_to_json(E))
    assert len(back.generators) == 6
    assert len(errors_from_json('{"builtin": "dephasing, pauli(1,x)"}', dim=4).generators) == 3


def test_schedule_json_round_trip():
    prog = parse(EXAMPLE)
    doc = schedule_to_json(prog.schedule)
    back = schedule_from_json(doc, 4)
    assert [w.scheme for w in back.windows] == [TWISTED_SLOW, DRIFT_IDENTITY]
    for a, b in zip(prog.schedule.windows, back.windows):
        assert a.cycles == b.cycles
        assert np.array_equal(a.hamiltonian, b.hamiltonian)
    assert schedule_to_json(back) == doc


def test_schedule_json_names_and_keywords():
    doc = json.dumps([{'scheme': 'slow', 'hamiltonian': 'heisenberg(1,2)', 'cycles': 2},
                      {'scheme': 'drift_strength_restored', 'hamiltonian': 'myop', 'cycles': 1}])
    sched = schedule_from_json(doc, 4, {'myop': embed(X, 2)})
    assert [w.scheme for w in sched.windows] == [PARALLEL_SLOW, DRIFT_RESTORED]
    with pytest.raises(SynchronizationError):
        schedule_from_json('[{"scheme": "slow", "hamiltonian": "zero", "cycles": 1.5}]', 4)
    with pytest.raises(ArgumentError):
        schedule_from_json('[{"scheme": "sideways", "hamiltonian": "zero"}]', 4)
    with pytest.raises(ArgumentError):
        schedule_from_json('{"windows": 3}', 4)


def test_flatten_with_schedule_override():
    prog = parse(EXAMPLE)
    bare = parse('group collective_pauli(2);\ndt 0.01;\n')
    sched = schedule_from_json(schedule_to_json(prog.schedule), 4)
    a = flatten(prog, 112)
    b = flatten(bare, 112, schedule=sched)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.kind == y.kind and x.at == y.at and x.role == y.role
        assert np.array_equal(x.operator, y.operator)
