"""
Named constructors for groups, operators and error spaces.

The pulse-program format and the command line refer to objects by builtin
name, e.g. ``collective_pauli(2)``, ``heisenberg(1,2)`` or ``pauli(1,x)``.
Qubit counts that can be inferred from the surrounding group may be omitted.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .exceptions import ArgumentError
from .operators import (MAX_DIM, PAULI, as_operator, expm, identity, kron, pauli_on,
                        random_hermitian)
from .program import heisenberg
from .symmetrize import (ErrorSpace, collective_errors, collective_pauli, dephasing_errors,
                         full_pauli, identity_group, independent_errors, spin_echo)

__all__ = ['Ctor', 'Context', 'GROUPS', 'OPERATORS', 'ERROR_SPACES', 'builtin_names',
           'resolve_group', 'resolve_operator', 'resolve_errors']

MAX_QUBITS = int(math.log2(MAX_DIM))
MAX_FULL_PAULI = 5


@dataclass(frozen=True)
class Ctor:
    """A constructor call ``name(arg, ...)`` or bare ``name``; args are int,
    float or identifier strings. Source position does not take part in
    equality."""

    name: str
    args: tuple = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(format_arg(a) for a in self.args)})"


def format_arg(a):
    if isinstance(a, bool):
        raise ArgumentError('boolean arguments are not supported')
    if isinstance(a, int):
        return str(a)
    if isinstance(a, float):
        s = '%.17g' % a
        if not any(c in s for c in '.eEn'):
            s += '.0'
        return s
    return str(a)


@dataclass
class Context:
    """Resolution context: system dimension (if known) and named operators."""

    dim: int = None
    operators: dict = field(default_factory=dict)

    @property
    def qubits(self):
        if self.dim is None:
            raise ArgumentError('qubit count cannot be inferred here; pass it explicitly')
        K = int(round(math.log2(self.dim)))
        if 2 ** K != self.dim:
            raise ArgumentError(f'system dimension {self.dim} is not a qubit register')
        return K


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ArgumentError(f'{what} must be an integer, got {x!r}')
    return x


def _num(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ArgumentError(f'{what} must be a number, got {x!r}')
    if not math.isfinite(x):
        raise ArgumentError(f'{what} must be finite')
    return float(x)


def _qubits(K):
    K = _int(K, 'qubit count')
    if not 1 <= K <= MAX_QUBITS:
        raise ArgumentError(f'qubit count must be in 1..{MAX_QUBITS}, got {K}')
    return K


def _site_args(args, ctx, n_tail):
    """Split ``([K,] site..., tail...)`` where ``K`` may come from context."""
    if len(args) == n_tail + 1:
        return ctx.qubits, args
    return _qubits(args[0]), args[1:]


# groups ---------------------------------------------------------------------

def _g_identity(args, ctx):
    if args:
        return identity_group(2 ** _qubits(args[0]))
    if ctx.dim is None:
        raise ArgumentError('identity needs a qubit count when no dimension is known')
    return identity_group(ctx.dim)


def _g_full_pauli(args, ctx):
    K = _qubits(args[0])
    if K > MAX_FULL_PAULI:
        raise ArgumentError(f'full_pauli is limited to K <= {MAX_FULL_PAULI}')
    return full_pauli(K)


GROUPS = {
    'identity': ((0, 1), _g_identity, 'trivial group {1}'),
    'spin_echo': ((0,), lambda a, c: spin_echo(), 'single-qubit {1, X}'),
    'collective_pauli': ((1,), lambda a, c: collective_pauli(_qubits(a[0])),
                         '{1, X^K, Y^K, Z^K}'),
    'full_pauli': ((1,), _g_full_pauli, 'all 4^K Pauli products'),
}


# operators ------------------------------------------------------------------

def _o_pauli(args, ctx):
    K, (site, axis) = _site_args(args, ctx, 1)
    return pauli_on(K, _int(site, 'site'), axis)


def _o_heisenberg(args, ctx):
    if len(args) == 2:
        K, (i, j) = ctx.qubits, args
    else:
        K, i, j = _qubits(args[0]), args[1], args[2]
    i, j = _int(i, 'site'), _int(j, 'site')
    if not (1 <= i <= K and 1 <= j <= K):
        raise ArgumentError(f'sites must lie in 1..{K}')
    return heisenberg(K, i, j)


def _o_rot(args, ctx):
    K, (site, axis, angle) = _site_args(args, ctx, 2)
    return expm(-0.5j * _num(angle, 'angle') * pauli_on(K, _int(site, 'site'), axis))


def _o_halfpi_pair(args, ctx):
    K, (i, a, j, b) = _site_args(args, ctx, 3)
    return (expm(-0.25j * np.pi * pauli_on(K, _int(i, 'site'), a))
            @ expm(-0.25j * np.pi * pauli_on(K, _int(j, 'site'), b)))


def _o_pauli_string(args, ctx):
    s = str(args[0]).lower()
    if not s or any(c not in 'ixyz' for c in s) or len(s) > MAX_QUBITS:
        raise ArgumentError(f'pauli_string needs letters from i, x, y, z, got {args[0]!r}')
    return kron(*[PAULI[c] for c in s])


def _o_zero(args, ctx):
    if args:
        d = 2 ** _qubits(args[0])
    elif ctx.dim is None:
        raise ArgumentError('zero needs a qubit count when no dimension is known')
    else:
        d = ctx.dim
    return np.zeros((d, d), dtype=complex)


def _o_identity(args, ctx):
    d = 2 ** _qubits(args[0]) if args else ctx.dim
    if d is None:
        raise ArgumentError('id needs a qubit count when no dimension is known')
    return identity(d)


def _o_random(args, ctx):
    seed = _int(args[0], 'seed')
    if len(args) == 2:
        d = 2 ** _qubits(args[1])
    elif ctx.dim is None:
        raise ArgumentError('random_hermitian needs a qubit count when no dimension is known')
    else:
        d = ctx.dim
    if seed < 0:
        raise ArgumentError('seed must be non-negative')
    return random_hermitian(d, seed)


OPERATORS = {
    'pauli': ((2, 3), _o_pauli, 'sigma_axis on one qubit: pauli([K,] site, axis)'),
    'heisenberg': ((2, 3), _o_heisenberg, 'sum_a sigma_a^(i) sigma_a^(j): heisenberg([K,] i, j)'),
    'rot': ((3, 4), _o_rot, 'exp(-i angle/2 sigma_axis): rot([K,] site, axis, angle)'),
    'halfpi_pair': ((4, 5), _o_halfpi_pair,
                    'exp(-i pi/4 sigma_a^(i)) exp(-i pi/4 sigma_b^(j)): halfpi_pair([K,] i, a, j, b)'),
    'pauli_string': ((1,), _o_pauli_string, 'tensor product of Paulis, e.g. pauli_string(xx)'),
    'zero': ((0, 1), _o_zero, 'zero operator'),
    'id': ((0, 1), _o_identity, 'identity operator'),
    'random_hermitian': ((1, 2), _o_random,
                         'seeded Gaussian Hermitian, unit spectral norm: random_hermitian(seed[, K])'),
}


# error spaces ---------------------------------------------------------------

def _k_or_ctx(args, ctx):
    return _qubits(args[0]) if args else ctx.qubits


ERROR_SPACES = {
    'independent': ((0, 1), lambda a, c: independent_errors(_k_or_ctx(a, c)),
                    'every single-qubit Pauli (3K generators)'),
    'collective': ((0, 1), lambda a, c: collective_errors(_k_or_ctx(a, c)),
                   'collective sum_i sigma_a^(i) (3 generators)'),
    'dephasing': ((0, 1), lambda a, c: dephasing_errors(_k_or_ctx(a, c)),
                  'sigma_z^(i) on every qubit (K generators)'),
}


def builtin_names(kind):
    table = {'group': GROUPS, 'operator': OPERATORS, 'errors': ERROR_SPACES}[kind]
    return sorted(table)


def _call(table, kind, ctor, ctx):
    if ctor.name not in table:
        raise ArgumentError(f'unknown {kind} {ctor.name!r}; available: '
                            + ', '.join(sorted(table)))
    arities, fn, _ = table[ctor.name]
    if len(ctor.args) not in arities:
        want = ' or '.join(str(a) for a in arities)
        raise ArgumentError(f'{ctor.name} takes {want} argument(s), got {len(ctor.args)}')
    return fn(ctor.args, ctx)


def resolve_group(ctor, ctx=None):
    return _call(GROUPS, 'group', ctor, ctx or Context())


def resolve_operator(ctor, ctx=None):
    ctx = ctx or Context()
    if not ctor.args and ctor.name in ctx.operators:
        return as_operator(ctx.operators[ctor.name])
    if ctor.name not in OPERATORS and not ctor.args:
        names = sorted(OPERATORS) + sorted(ctx.operators)
        raise ArgumentError(f'unknown operator {ctor.name!r}; available: ' + ', '.join(names))
    return _call(OPERATORS, 'operator', ctor, ctx)


def resolve_errors(ctor, ctx=None):
    """An error space builtin, or any operator builtin as a single generator."""
    ctx = ctx or Context()
    if ctor.name in ERROR_SPACES:
        return _call(ERROR_SPACES, 'error space', ctor, ctx)
    if ctor.name in OPERATORS or ctor.name in ctx.operators:
        return ErrorSpace((resolve_operator(ctor, ctx),))
    raise ArgumentError(f'unknown error space {ctor.name!r}; available: '
                        + ', '.join(sorted(ERROR_SPACES) + sorted(OPERATORS)))
