"""Command-line front end: ``decoupler-lab <command> ...``.

Exit codes: 0 success, 1 negative verdict or runtime constraint failure
(synchronization, bounds), 2 invalid input. Data goes to stdout or files,
diagnostics to stderr.
"""
import argparse
from datetime import datetime, timezone
import hashlib
import json
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .dynamics import (BathModel, SimConfig, coherence_metric, convergence_sweep,
                       dephasing_bath, evolve_schedule, linear_bath, pulse_width_sweep)
from .exceptions import BoundsError, DecouplerError, SynchronizationError
from .library import Context, resolve_errors, resolve_group, resolve_operator
from .operators import operator_from_json, operator_to_dict
from .program import PARALLEL_SLOW, CycleSpec, universality_audit
from .schedfmt import (errors_from_json, group_from_json, parse, parse_ctor, parse_ctor_list,
                       schedule_from_json, validate)
from .symmetrize import identity_group, in_centralizer, is_correctable, project


class UsageError(Exception):
    pass


def _load_operators(pairs):
    ops = {}
    for item in pairs or []:
        name, sep, path = item.partition('=')
        if not sep:
            raise UsageError(f'--json expects NAME=FILE, got {item!r}')
        ops[name] = operator_from_json(Path(path).read_text())
    return ops


def _json_file(text):
    return text.endswith('.json') and Path(text).is_file()


def _group(text, ops):
    """A builtin group expression or a group JSON document on disk."""
    if _json_file(text):
        return group_from_json(Path(text).read_text(), ops)
    return resolve_group(parse_ctor(text), Context(operators=ops))


def _group_and_operator(group_text, op_text, ops):
    if _json_file(group_text):
        G = _group(group_text, ops)
        return G, resolve_operator(parse_ctor(op_text), Context(dim=G.dim, operators=ops))
    gctor = parse_ctor(group_text)
    octor = parse_ctor(op_text)
    try:
        G = resolve_group(gctor, Context(operators=ops))
    except DecouplerError:
        H = resolve_operator(octor, Context(operators=ops))
        G = resolve_group(gctor, Context(dim=H.shape[0], operators=ops))
        return G, H
    return G, resolve_operator(octor, Context(dim=G.dim, operators=ops))


def _bath(text, K, H_S=None, seed=0):
    c = parse_ctor(text)
    a = c.args
    if c.name == 'none':
        return None
    if c.name == 'dephasing_bath':
        bath = dephasing_bath(K, int(a[0]) if a else 2, float(a[1]) if len(a) > 1 else 0.5)
    elif c.name == 'linear_bath':
        bath = linear_bath(K, int(a[0]) if a else 2, float(a[1]) if len(a) > 1 else 0.5,
                           int(a[2]) if len(a) > 2 else seed)
    else:
        raise UsageError(f'unknown bath {c.name!r}; available: none, dephasing_bath, linear_bath')
    if H_S is not None:
        bath = BathModel(bath.system_dim, bath.H_B, bath.couplings, H_S)
    return bath


def _qubit_count(dim):
    K = int(round(np.log2(dim)))
    if 2 ** K != dim:
        raise UsageError('simulation builtins need a qubit system')
    return K


def _initial_state(system_dim, bath_dim):
    plus = np.ones(system_dim, dtype=complex) / np.sqrt(system_dim)
    bath0 = np.zeros(bath_dim, dtype=complex)
    bath0[0] = 1
    return np.kron(plus, bath0)


def _manifest(args, command, extra=None):
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ('func', 'out_dir')}
    if getattr(args, 'program', None):
        inputs['program_text'] = Path(args.program).read_text()
    if getattr(args, 'schedule', None):
        inputs['schedule_text'] = Path(args.schedule).read_text()
    digest = hashlib.sha256(json.dumps(inputs, sort_keys=True, default=str).encode()).hexdigest()
    doc = {'command': command, 'config_hash': digest, 'seed': args.seed,
           'tool_version': __version__,
           'timestamp': datetime.now(timezone.utc).isoformat(timespec='seconds')}
    doc.update(extra or {})
    return doc


def _out_path(args, name):
    p = Path(name)
    if args.out_dir and not p.is_absolute():
        p = Path(args.out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_manifest(path, doc):
    Path(str(path) + '.manifest.json').write_text(json.dumps(doc, indent=2, sort_keys=True) + '\n')


def _load_program(args):
    prog = parse(Path(args.program).read_text(), _load_operators(args.json))
    diags = validate(prog, args.tol)
    for d in diags:
        print(f'{args.program}:{d}', file=sys.stderr)
    if any(d.severity == 'error' for d in diags):
        raise UsageError('program has errors')
    return prog


def _schedule(args, prog):
    """The program's windows, or those of ``--schedule`` when given."""
    if getattr(args, 'schedule', None):
        sched = schedule_from_json(Path(args.schedule).read_text(), prog.cycle_spec.dim,
                                   prog.operators)
        sched.check(prog.cycle_spec, args.tol)
        return sched
    return prog.schedule


# commands --------------------------------------------------------------------

def cmd_project(args):
    ops = _load_operators(args.json)
    G, H = _group_and_operator(args.group, args.h, ops)
    P = project(G, H)
    inside = in_centralizer(G, H, args.tol)
    doc = {'projection': operator_to_dict(np.round(P, 15) + 0.0),
           'in_centralizer': inside,
           'verdict': 'in centralizer' if inside else 'not in centralizer'}
    print(json.dumps(doc))
    return 0


def cmd_check(args):
    ops = _load_operators(args.json)
    G = _group(args.group, ops)
    if _json_file(args.errors):
        space = errors_from_json(Path(args.errors).read_text(), G.dim, ops)
    else:
        ctx = Context(dim=G.dim, operators=ops)
        ctors = parse_ctor_list(args.errors)
        space = resolve_errors(ctors[0], ctx)
        for c in ctors[1:]:
            space = space + resolve_errors(c, ctx)
    if space.dim != G.dim:
        raise UsageError(f'error space dimension {space.dim} does not match group ({G.dim})')
    report = is_correctable(G, space, args.tol)
    rows = [{'generator': k, 'residual': r} for k, r in enumerate(report.residuals)]
    print(json.dumps({'correctable': report.correctable, 'residuals': rows}))
    return 0 if report.correctable else 1


def cmd_universality(args):
    prog = _load_program(args)
    G = prog.decoupling_group
    windows = _schedule(args, prog).windows
    slow = [w.hamiltonian for w in windows if w.scheme == PARALLEL_SLOW]
    fast = [w for w in windows if w.scheme != PARALLEL_SLOW]
    report = universality_audit(G, slow, fast, tol=args.tol)
    print(json.dumps(report.to_dict()))
    return 0


def _system(args, prog):
    G = prog.decoupling_group
    ctx = Context(dim=G.dim, operators=prog.operators)
    H_S = resolve_operator(parse_ctor(args.h), ctx) if args.h else None
    bath = _bath(args.bath, _qubit_count(G.dim), H_S, args.seed)
    if bath is None:
        H = H_S if H_S is not None else np.zeros((G.dim, G.dim), complex)
        return H, H, 1
    return bath, bath.hamiltonian(), bath.bath_dim


def cmd_simulate(args):
    prog = _load_program(args)
    system, H, d_b = _system(args, prog)
    spec = prog.cycle_spec
    schedule = _schedule(args, prog)
    if args.no_decoupling:
        spec = CycleSpec(identity_group(spec.dim), spec.cycle_time)
        schedule = None
    cfg = SimConfig(spec, args.cycles, _initial_state(spec.dim, d_b), args.pulse_width)
    traj = evolve_schedule(cfg, H, schedule)
    obs = resolve_operator(parse_ctor(args.observable), Context(dim=spec.dim, operators=prog.operators))
    values = coherence_metric(traj, obs)
    out = _out_path(args, args.out)
    out.write_text(traj.to_csv(values), newline='')
    _write_manifest(out, _manifest(args, 'simulate'))
    return 0


def cmd_sweep(args):
    prog = _load_program(args)
    system, H, d_b = _system(args, prog)
    G = prog.decoupling_group
    psi0 = _initial_state(G.dim, d_b)
    T = args.total_time
    if args.metric == 'pulse_infidelity':
        if not args.tau:
            raise UsageError('pulse_infidelity needs --tau')
        T_c = args.tc[0] if args.tc else prog.cycle_spec.cycle_time
        result = pulse_width_sweep(system, G, T_c, args.tau, T, psi0, seed=args.seed)
    else:
        if not args.tc:
            raise UsageError(f'{args.metric} needs --tc')
        result = convergence_sweep(system, G, args.metric, args.tc, T, psi0, seed=args.seed)
    out = _out_path(args, args.out)
    result.write(out)
    _write_manifest(out, _manifest(args, 'sweep', {'fitted_slope': result.fitted_slope}))
    print(json.dumps({'fitted_slope': result.fitted_slope, 'prefactor': result.prefactor,
                      'monotone': result.monotone}))
    return 0


def _floats(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    parser = argparse.ArgumentParser(prog='decoupler-lab', description=__doc__.splitlines()[0])
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--tol', type=float, default=1e-10)
    parser.add_argument('--out-dir', default=None)
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('project', help='group average of a Hamiltonian')
    p.add_argument('--group', required=True, help='builtin group or group JSON file')
    p.add_argument('--h', required=True)
    p.add_argument('--json', action='append', metavar='NAME=FILE')
    p.set_defaults(func=cmd_project)

    p = sub.add_parser('check', help='correctability of an error space')
    p.add_argument('--group', required=True, help='builtin group or group JSON file')
    p.add_argument('--errors', required=True)
    p.add_argument('--json', action='append', metavar='NAME=FILE')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser('universality', help='Lie-closure audit of a program')
    p.add_argument('program')
    p.add_argument('--json', action='append', metavar='NAME=FILE')
    p.add_argument('--schedule', help='JSON window list replacing the program windows')
    p.set_defaults(func=cmd_universality)

    for name, func in (('simulate', cmd_simulate), ('sweep', cmd_sweep)):
        p = sub.add_parser(name)
        p.add_argument('program')
        p.add_argument('--bath', default='none')
        p.add_argument('--h', default=None, help='system Hamiltonian builtin')
        p.add_argument('--out', required=True)
        p.add_argument('--json', action='append', metavar='NAME=FILE')
        p.set_defaults(func=func)
    sim = sub.choices['simulate']
    sim.add_argument('--cycles', type=int, required=True)
    sim.add_argument('--schedule', help='JSON window list replacing the program windows')
    sim.add_argument('--observable', default='pauli(1,x)')
    sim.add_argument('--pulse-width', type=float, default=0.0)
    sim.add_argument('--no-decoupling', action='store_true',
                     help='free evolution over the same cycle grid')
    sw = sub.choices['sweep']
    sw.add_argument('--tc', type=_floats, default=None)
    sw.add_argument('--tau', type=_floats, default=None)
    sw.add_argument('--metric', default='residual',
                    choices=['residual', 'defect', 'infidelity', 'pulse_infidelity'])
    sw.add_argument('--total-time', type=float, default=1.0)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SynchronizationError, BoundsError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 1
    except (DecouplerError, UsageError, OSError, ValueError, IndexError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
