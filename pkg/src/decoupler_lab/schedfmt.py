"""
Textual pulse programs (``.pprog``).

Grammar (statements end with ``;``, ``#`` starts a line comment)::

    program     := group_stmt dt_stmt errors_stmt? window_stmt*
    group_stmt  := "group" ctor ";"
    dt_stmt     := "dt" NUMBER ";"
    errors_stmt := "errors" ctor ("," ctor)* ";"
    window_stmt := "window" scheme binding* "cycles" "=" INT ";"
    scheme      := "slow" | "twisted" | "drift_identity" | "drift_restored"
    binding     := IDENT "=" ctor
    ctor        := IDENT "(" arg ("," arg)* ")" | IDENT
    arg         := NUMBER | IDENT

Example::

    group collective_pauli(2);
    dt 0.01;
    errors independent(2);
    window twisted P=halfpi_pair(1,y,2,x) A=heisenberg(1,2) cycles=10;
    window drift_identity B=pauli(1,x) cycles=100;

:func:`parse` checks syntax and resolves builtin names; :func:`validate`
reports physics constraints; :func:`flatten` lowers a program to a timed
event list.
"""
from dataclasses import dataclass, field
from functools import cached_property
import json
import math
import re

import numpy as np

from .dynamics import segment_hamiltonians
from .exceptions import ArgumentError, BoundsError, DecouplerError, SynchronizationError
from .library import Context, Ctor, format_arg, resolve_errors, resolve_group, resolve_operator
from .operators import (as_operator, dagger, equal_up_to_phase, identity, is_hermitian,
                        is_unitary, operator_from_dict, operator_to_dict)
from .program import (DRIFT_IDENTITY, DRIFT_RESTORED, PARALLEL_SLOW, TWISTED_SLOW,
                      ControlSchedule, CycleSpec, Window, pulses_from_group)
from .symmetrize import DEFAULT_TOL, ErrorSpace, in_centralizer, is_correctable, verify_group

__all__ = ['ParseError', 'ResolutionError', 'Diagnostic', 'WindowStmt', 'PulseProgram',
           'Event', 'EventList', 'SCHEME_KEYWORDS', 'tokenize', 'parse', 'parse_ctor',
           'parse_ctor_list', 'serialize', 'validate', 'flatten', 'group_to_json',
           'group_from_json', 'errors_to_json', 'errors_from_json', 'schedule_to_json',
           'schedule_from_json']

SCHEME_KEYWORDS = {
    'slow': PARALLEL_SLOW,
    'twisted': TWISTED_SLOW,
    'drift_identity': DRIFT_IDENTITY,
    'drift_restored': DRIFT_RESTORED,
}
KEYWORD_OF = {v: k for k, v in SCHEME_KEYWORDS.items()}
KEYWORDS = {'group', 'dt', 'errors', 'window', 'cycles'} | set(SCHEME_KEYWORDS)

# binding names per scheme: (required, optional), in canonical order
BINDINGS = {
    'slow': (('A',), ()),
    'twisted': (('P',), ('A',)),
    'drift_identity': (('B',), ()),
    'drift_restored': (('B',), ()),
}


class ParseError(DecouplerError):
    """Syntax error with a 1-based source position and expected-token set."""

    def __init__(self, message, line, col, expected=()):
        self.line, self.col = line, col
        self.expected = tuple(expected)
        self.bare_message = message
        super().__init__(f'{line}:{col}: {message}')


class ResolutionError(ParseError):
    """Unknown builtin name or invalid constructor arguments."""


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        return f'{self.line}:{self.col}: {self.severity}: {self.message}'


@dataclass(frozen=True)
class WindowStmt:
    keyword: str
    bindings: tuple
    cycles: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __post_init__(self):
        req, opt = BINDINGS[self.keyword]
        order = {k: n for n, k in enumerate(req + opt)}
        object.__setattr__(self, 'bindings',
                           tuple(sorted(self.bindings, key=lambda b: order.get(b[0], 99))))

    @property
    def scheme(self):
        return SCHEME_KEYWORDS[self.keyword]

    def binding(self, name):
        for k, v in self.bindings:
            if k == name:
                return v
        return None


@dataclass(frozen=True)
class PulseProgram:
    """Parsed program: structure only, compared without source positions.

    Operators are resolved lazily through :attr:`context`.
    """

    group: Ctor
    dt: float
    errors: tuple = ()
    windows: tuple = ()
    operators: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @cached_property
    def decoupling_group(self):
        return resolve_group(self.group, Context(operators=self.operators))

    @property
    def context(self):
        return Context(dim=self.decoupling_group.dim, operators=self.operators)

    @property
    def cycle_spec(self):
        return CycleSpec(self.decoupling_group, self.dt)

    @cached_property
    def error_space(self):
        if not self.errors:
            return None
        ctx = self.context
        space = resolve_errors(self.errors[0], ctx)
        for c in self.errors[1:]:
            space = space + resolve_errors(c, ctx)
        return space

    def window(self, stmt):
        ctx = self.context
        op = {k: resolve_operator(v, ctx) for k, v in stmt.bindings}
        ham = op.get('B') if stmt.keyword.startswith('drift') else op.get('A')
        return Window(stmt.scheme, ham, stmt.cycles, op.get('P'))

    @property
    def schedule(self):
        return ControlSchedule(tuple(self.window(w) for w in self.windows))


# lexer ----------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str      # IDENT, INT, FLOAT, PUNCT, EOF
    text: str
    line: int
    col: int


_TOKEN = re.compile(r'''
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[();,=])
''', re.VERBOSE)


def tokenize(source):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f'unexpected character {source[pos]!r}', line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == 'nl':
            line += 1
            line_start = m.end()
        elif kind == 'num':
            is_int = re.fullmatch(r'[-+]?\d+', text) is not None
            tokens.append(Token('INT' if is_int else 'FLOAT', text, line, col))
        elif kind == 'ident':
            tokens.append(Token('IDENT', text, line, col))
        elif kind == 'punct':
            tokens.append(Token('PUNCT', text, line, col))
        pos = m.end()
    tokens.append(Token('EOF', '', line, pos - line_start + 1))
    return tokens


# parser ---------------------------------------------------------------------

def _describe(tok):
    return 'end of input' if tok.kind == 'EOF' else repr(tok.text)


class _Parser:
    def __init__(self, source):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, *expected):
        t = self.tok
        exp = ' or '.join(expected)
        raise ParseError(f'expected {exp}, found {_describe(t)}', t.line, t.col, expected)

    def accept(self, text):
        if self.tok.kind in ('PUNCT', 'IDENT') and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.fail(repr(text))
        return self.tokens[self.i - 1]

    def ident(self, what='identifier'):
        t = self.tok
        if t.kind != 'IDENT' or t.text in KEYWORDS:
            self.fail(what)
        self.i += 1
        return t

    def number(self):
        t = self.tok
        if t.kind not in ('INT', 'FLOAT'):
            self.fail('number')
        self.i += 1
        value = float(t.text)
        if not math.isfinite(value):
            raise ParseError(f'number {t.text} is not finite', t.line, t.col, ('number',))
        return value, t

    def integer(self):
        t = self.tok
        if t.kind != 'INT':
            self.fail('integer')
        self.i += 1
        return int(t.text)

    def arg(self):
        t = self.tok
        if t.kind == 'INT':
            self.i += 1
            return int(t.text)
        if t.kind == 'FLOAT':
            self.i += 1
            v = float(t.text)
            if not math.isfinite(v):
                raise ParseError(f'number {t.text} is not finite', t.line, t.col, ('number',))
            return v
        if t.kind == 'IDENT':
            self.i += 1
            return t.text
        self.fail('number', 'identifier')

    def ctor(self):
        name = self.ident('constructor name')
        args = []
        if self.accept('('):
            args.append(self.arg())
            while self.accept(','):
                args.append(self.arg())
            self.expect(')')
        return Ctor(name.text, tuple(args), name.line, name.col)

    def program(self):
        self.expect('group')
        group = self.ctor()
        self.expect(';')
        self.expect('dt')
        dt, dt_tok = self.number()
        if dt <= 0:
            raise ParseError('dt must be positive', dt_tok.line, dt_tok.col, ('positive number',))
        self.expect(';')
        errors = []
        if self.accept('errors'):
            errors.append(self.ctor())
            while self.accept(','):
                errors.append(self.ctor())
            self.expect(';')
        windows = []
        while self.tok.kind != 'EOF':
            if not (self.tok.kind == 'IDENT' and self.tok.text == 'window'):
                self.fail("'window'", 'end of input')
            windows.append(self.window())
        return group, dt, errors, windows

    def window(self):
        start = self.expect('window')
        t = self.tok
        if t.kind != 'IDENT' or t.text not in SCHEME_KEYWORDS:
            self.fail(*(repr(k) for k in SCHEME_KEYWORDS))
        keyword = t.text
        self.i += 1
        req, opt = BINDINGS[keyword]
        bindings = {}
        while not (self.tok.kind == 'IDENT' and self.tok.text == 'cycles'):
            name = self.tok
            if name.kind != 'IDENT' or name.text in KEYWORDS:
                self.fail('binding', "'cycles'")
            if name.text not in req + opt:
                raise ParseError(f'window {keyword} does not take {name.text!r}; allowed: '
                                 + ', '.join(req + opt), name.line, name.col, req + opt)
            if name.text in bindings:
                raise ParseError(f'duplicate binding {name.text!r}', name.line, name.col)
            self.i += 1
            self.expect('=')
            bindings[name.text] = self.ctor()
        for r in req:
            if r not in bindings:
                raise ParseError(f'window {keyword} needs {r}=...', start.line, start.col, (r,))
        self.expect('cycles')
        self.expect('=')
        cycles = self.integer()
        self.expect(';')
        return WindowStmt(keyword, tuple(bindings.items()), cycles, start.line, start.col)


def _resolve(fn, ctor, ctx):
    try:
        return fn(ctor, ctx)
    except DecouplerError as exc:
        raise ResolutionError(str(exc), ctor.line, ctor.col) from exc


def parse(source, operators=None):
    """
    Parse ``source`` into a :class:`PulseProgram`.

    ``operators`` maps extra names (e.g. operators loaded from JSON) to
    matrices so programs can reference them as bare identifiers.

    Raises
    ------
    ParseError
        Syntax error, with position and the expected-token set.
    ResolutionError
        Unknown builtin or bad constructor arguments.
    """
    operators = dict(operators or {})
    group, dt, errors, windows = _Parser(source).program()
    prog = PulseProgram(group, dt, tuple(errors), tuple(windows), operators)
    G = _resolve(resolve_group, group, Context(operators=operators))
    ctx = Context(dim=G.dim, operators=operators)
    for c in errors:
        _resolve(resolve_errors, c, ctx)
    for w in windows:
        for _, c in w.bindings:
            _resolve(resolve_operator, c, ctx)
    return prog


def parse_ctor(text):
    """Parse a single constructor expression such as ``pauli(1,1,z)``."""
    p = _Parser(text)
    c = p.ctor()
    if p.tok.kind != 'EOF':
        p.fail('end of input')
    return c


def parse_ctor_list(text):
    """Parse ``ctor ("," ctor)*``, e.g. ``independent(2), pauli(1,1,z)``."""
    p = _Parser(text)
    out = [p.ctor()]
    while p.accept(','):
        out.append(p.ctor())
    if p.tok.kind != 'EOF':
        p.fail("','", 'end of input')
    return out


def serialize(program):
    """Canonical text: one statement per line, canonical binding order,
    17-significant-digit floats."""
    lines = [f'group {program.group};', f'dt {format_arg(float(program.dt))};']
    if program.errors:
        lines.append('errors ' + ', '.join(str(c) for c in program.errors) + ';')
    for w in program.windows:
        parts = ['window', w.keyword] + [f'{k}={v}' for k, v in w.bindings]
        parts.append(f'cycles={int(w.cycles)}')
        lines.append(' '.join(parts) + ';')
    return '\n'.join(lines) + '\n'


# validation -----------------------------------------------------------------

def validate(program, tol=DEFAULT_TOL):
    """
    Physics checks on a parsed program.

    Errors: slow or twisted Hamiltonian outside the centralizer, non-unitary
    frame pulse, non-Hermitian operand, declared error space not corrected.
    Warning: frame pulse that commutes with the group or belongs to it, which
    makes the twist trivial.
    """
    diags = []
    G = program.decoupling_group
    ctx = program.context
    if program.errors:
        c = program.errors[0]
        if program.error_space.dim != G.dim:
            return [Diagnostic('error', f'error space dimension {program.error_space.dim} does '
                               f'not match group dimension {G.dim}', c.line, c.col)]
        report = is_correctable(G, program.error_space, tol)
        if not report.correctable:
            worst = max(report.residuals)
            diags.append(Diagnostic('error', f'error space not correctable by the group '
                                    f'(largest residual {worst:.3g})', c.line, c.col))
    for w in program.windows:
        ops = {k: (v, resolve_operator(v, ctx)) for k, v in w.bindings}
        if w.cycles < 1:
            diags.append(Diagnostic('error', 'window must span at least one cycle', w.line, w.col))
        wrong = [k for k, (_, op) in ops.items() if op.shape[0] != G.dim]
        if wrong:
            for k in wrong:
                c = ops[k][0]
                diags.append(Diagnostic('error', f'{k}={c} has dimension {ops[k][1].shape[0]}, '
                                        f'group acts on {G.dim}', c.line, c.col))
            continue
        for name, (c, op) in ops.items():
            if name != 'P' and not is_hermitian(op):
                diags.append(Diagnostic('error', f'{name} is not Hermitian', c.line, c.col))
        if w.keyword in ('slow', 'twisted') and 'A' in ops:
            c, A = ops['A']
            if not in_centralizer(G, A, tol):
                diags.append(Diagnostic('error', f'A={c} is not in centralizer of the group',
                                        c.line, c.col))
        if w.keyword == 'twisted':
            c, P = ops['P']
            if not is_unitary(P):
                diags.append(Diagnostic('error', f'P={c} is not unitary', c.line, c.col))
            elif in_centralizer(G, P, tol) or G.contains(P):
                diags.append(Diagnostic('warning', f'P={c} lies in Z(G) ∪ G: twist is trivial',
                                        c.line, c.col))
    return diags


# flattening -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Event:
    """A pulse (``operator`` is a unitary) or a segment (``operator`` is the
    Hamiltonian on for ``duration``).

    ``role`` is ``'decoupling'`` for ``D_j`` pulses and ``'frame'`` for the
    ``P``/``P^dagger`` of twisted windows. A finite-width pulse keeps
    ``background`` switched on underneath it.
    """

    at: float
    kind: str
    operator: np.ndarray
    duration: float = 0.0
    role: str = 'decoupling'
    cycle: int = 0
    background: np.ndarray = None


@dataclass(frozen=True, eq=False)
class EventList:
    events: tuple
    total_duration: float
    cycle_time: float

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def pulses(self, role=None):
        return [e for e in self.events if e.kind == 'pulse' and (role is None or e.role == role)]

    def cycle_products(self):
        """Ordered product of decoupling pulses within each cycle."""
        out = {}
        for e in self.pulses('decoupling'):
            out[e.cycle] = e.operator @ out.get(e.cycle, identity(e.operator.shape[0]))
        return [out[k] for k in sorted(out)]

    def check_cyclicity(self, tol=1e-10):
        return all(equal_up_to_phase(p, identity(p.shape[0]), tol) for p in self.cycle_products())


def flatten(program, n_cycles_total, hamiltonian=None, pulse_width=0.0, h_during_pulse=True,
            schedule=None):
    """
    Lower a program to a timed event list covering ``n_cycles_total`` cycles.

    Each cycle emits, for ``j = 1..|G|``, a segment of the ``j``-th
    subinterval followed by pulse ``D_j`` at ``j * dt`` (ending there when the
    pulse has finite width). Twisted windows are bracketed by ``P`` at their
    first cycle boundary and ``P^dagger`` at their last. Cycles after the last
    window are plain decoupling. ``schedule`` replaces the program's own
    windows, e.g. one loaded with :func:`schedule_from_json`.

    Raises
    ------
    BoundsError
        Windows need more than ``n_cycles_total`` cycles.
    """
    spec = program.cycle_spec
    schedule = program.schedule if schedule is None else schedule
    if schedule.total_cycles > n_cycles_total:
        raise BoundsError(f'windows need {schedule.total_cycles} cycles, '
                          f'only {n_cycles_total} available')
    d_sys = spec.dim
    H = np.zeros((d_sys, d_sys), complex) if hamiltonian is None else as_operator(hamiltonian)
    dt, tau, T_c = spec.delta_t, float(pulse_width), spec.cycle_time
    if tau < 0 or (tau > 0 and tau >= dt):
        raise ArgumentError(f'pulse width {tau} must lie in [0, dt)')
    pulses = pulses_from_group(spec)
    blocks = list(schedule.windows)
    rest = n_cycles_total - schedule.total_cycles
    if rest:
        blocks.append(None)
    events = []
    cycle = 0
    for w in blocks:
        n = rest if w is None else w.cycles
        segs = segment_hamiltonians(spec, H, w)
        t0 = cycle * T_c
        if w is not None and w.scheme == TWISTED_SLOW:
            events.append(Event(t0, 'pulse', w.pulse, role='frame', cycle=cycle))
        for c in range(cycle, cycle + n):
            start = c * T_c
            for j, (Hj, D) in enumerate(zip(segs, pulses)):
                events.append(Event(start + j * dt, 'segment', Hj, dt - tau, cycle=c))
                events.append(Event(start + (j + 1) * dt - tau, 'pulse', D, tau, cycle=c,
                                    background=Hj if (tau and h_during_pulse) else None))
        cycle += n
        if w is not None and w.scheme == TWISTED_SLOW:
            events.append(Event(cycle * T_c, 'pulse', dagger(w.pulse), role='frame',
                                cycle=cycle - 1))
    return EventList(tuple(events), n_cycles_total * T_c, T_c)


# JSON documents ---------------------------------------------------------------
#
# group:       {"builtin": "collective_pauli(2)"} or {"elements": [op, ...]}
# error space: {"builtin": "independent(2)"}     or {"generators": [op, ...]}
# schedule:    [{"scheme", "hamiltonian", "cycles", "pulse"}, ...] or {"windows": [...]}
#
# where an operand is a builtin/named-operator string or an inline
# {"dim", "re", "im"} operator document.

def _load(doc):
    if isinstance(doc, (str, bytes)):
        try:
            return json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f'invalid JSON: {exc}') from exc
    return doc


def _operand(value, ctx):
    if value is None:
        return None
    if isinstance(value, str):
        return resolve_operator(parse_ctor(value), ctx)
    if isinstance(value, dict):
        return operator_from_dict(value)
    raise ArgumentError(f'operand must be a builtin name or an operator document, got {value!r}')


def group_to_json(G, builtin=None):
    """Serialize a group, by builtin name when given, else with inline elements."""
    doc = {'builtin': str(builtin)} if builtin else {'elements': [operator_to_dict(g) for g in G]}
    return json.dumps(doc, sort_keys=True)


def group_from_json(doc, operators=None):
    doc = _load(doc)
    if not isinstance(doc, dict):
        raise ArgumentError('group document must be a JSON object')
    if 'builtin' in doc:
        return resolve_group(parse_ctor(doc['builtin']), Context(operators=dict(operators or {})))
    if 'elements' in doc:
        return verify_group([operator_from_dict(e) for e in doc['elements']])
    raise ArgumentError("group document needs 'builtin' or 'elements'")


def errors_to_json(space, builtin=None):
    doc = ({'builtin': str(builtin)} if builtin
           else {'generators': [operator_to_dict(e) for e in space.generators]})
    return json.dumps(doc, sort_keys=True)


def errors_from_json(doc, dim=None, operators=None):
    doc = _load(doc)
    if not isinstance(doc, dict):
        raise ArgumentError('error-space document must be a JSON object')
    ctx = Context(dim=dim, operators=dict(operators or {}))
    if 'builtin' in doc:
        ctors = parse_ctor_list(doc['builtin'])
        space = resolve_errors(ctors[0], ctx)
        for c in ctors[1:]:
            space = space + resolve_errors(c, ctx)
        return space
    if 'generators' in doc:
        return ErrorSpace(tuple(operator_from_dict(e) for e in doc['generators']))
    raise ArgumentError("error-space document needs 'builtin' or 'generators'")


def schedule_to_json(schedule):
    """Serialize a :class:`ControlSchedule` with every operand inlined."""
    windows = []
    for w in schedule.windows:
        windows.append({'scheme': w.scheme,
                        'hamiltonian': None if w.hamiltonian is None
                        else operator_to_dict(w.hamiltonian),
                        'cycles': int(w.cycles),
                        'pulse': None if w.pulse is None else operator_to_dict(w.pulse)})
    return json.dumps({'windows': windows}, sort_keys=True)


def schedule_from_json(doc, dim, operators=None):
    """
    Build a :class:`ControlSchedule` from window objects.

    ``scheme`` may be a full scheme name or a program keyword (``slow``,
    ``twisted``, ...). Operands are resolved on a system of dimension ``dim``.
    """
    doc = _load(doc)
    items = doc.get('windows') if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise ArgumentError("schedule document must be a list of windows or {'windows': [...]}")
    ctx = Context(dim=dim, operators=dict(operators or {}))
    windows = []
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise ArgumentError(f'window {k} must be a JSON object')
        scheme = SCHEME_KEYWORDS.get(item.get('scheme'), item.get('scheme'))
        cycles = item.get('cycles', 1)
        if isinstance(cycles, bool) or not isinstance(cycles, int):
            raise SynchronizationError(f'window {k}: cycles must be a whole number, got {cycles!r}')
        windows.append(Window(scheme, _operand(item.get('hamiltonian'), ctx), cycles,
                              _operand(item.get('pulse'), ctx)))
    return ControlSchedule(tuple(windows))
