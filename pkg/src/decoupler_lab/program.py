"""
Programming control on top of a decoupler.

A control window runs for an integer number of decoupling cycles and uses
one of four schemes:

``parallel_slow``
    A Hamiltonian ``A`` from the centralizer is left on during the window.
``twisted_slow``
    Pulse ``P`` before the window and ``P^dagger`` after it. The effective
    decoupler becomes ``P^dagger G P`` and an optional centralizer Hamiltonian
    ``A`` applied during the window shows up as ``P^dagger A P``.
``drift_identity_frame``
    ``B`` is switched on only in the identity-frame subinterval of every
    cycle, contributing ``B / |G|``.
``drift_strength_restored``
    ``g_j B g_j^dagger`` is switched on in subinterval ``j``, contributing
    the full ``B``.

Universality of the resulting repertoire is decided by closing the
generated Lie algebra numerically.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ArgumentError, ConstraintError, ResourceError
from .operators import (as_operator, commutator, dagger, embed,
                        identity, is_hermitian, is_unitary, pauli_on)
from .symmetrize import DEFAULT_TOL, DecouplingGroup, in_centralizer, project

__all__ = ['PARALLEL_SLOW', 'TWISTED_SLOW', 'DRIFT_IDENTITY', 'DRIFT_RESTORED', 'SCHEMES',
           'CycleSpec', 'Window', 'ControlSchedule', 'LieClosureReport', 'heisenberg',
           'pulses_from_group', 'check_window', 'effective_hamiltonian', 'lie_closure',
           'universality_audit']

PARALLEL_SLOW = 'parallel_slow'
TWISTED_SLOW = 'twisted_slow'
DRIFT_IDENTITY = 'drift_identity_frame'
DRIFT_RESTORED = 'drift_strength_restored'
SCHEMES = (PARALLEL_SLOW, TWISTED_SLOW, DRIFT_IDENTITY, DRIFT_RESTORED)


@dataclass(frozen=True, eq=False)
class CycleSpec:
    """A decoupling group cycled with subinterval ``delta_t``."""

    group: DecouplingGroup
    delta_t: float

    def __post_init__(self):
        if not self.delta_t > 0:
            raise ArgumentError(f'delta_t must be positive, got {self.delta_t}')

    @property
    def cycle_time(self):
        return self.group.order * self.delta_t

    @property
    def dim(self):
        return self.group.dim


@dataclass(frozen=True, eq=False)
class Window:
    """One control window of ``cycles`` whole decoupling cycles.

    ``hamiltonian`` is ``A`` for the slow schemes and ``B`` for the drift
    schemes; it may be ``None`` for a bare twisted window. ``pulse`` is the
    frame pulse ``P`` of a twisted window.
    """

    scheme: str
    hamiltonian: np.ndarray = None
    cycles: int = 1
    pulse: np.ndarray = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ArgumentError(f'unknown scheme {self.scheme!r}; expected one of {SCHEMES}')
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ArgumentError(f'window must span at least one whole cycle, got {self.cycles}')
        if self.hamiltonian is None and self.scheme != TWISTED_SLOW:
            raise ArgumentError(f'scheme {self.scheme} needs a Hamiltonian operand')
        if self.pulse is None and self.scheme == TWISTED_SLOW:
            raise ArgumentError('twisted_slow needs a frame pulse P')


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    windows: tuple = ()

    @property
    def total_cycles(self):
        return sum(w.cycles for w in self.windows)

    def boundaries(self):
        """Cycle indices where each window starts."""
        return list(np.cumsum([0] + [w.cycles for w in self.windows])[:-1])

    def check(self, spec, tol=DEFAULT_TOL):
        for w in self.windows:
            check_window(spec.group, w, tol)


@dataclass(frozen=True, eq=False)
class LieClosureReport:
    generator_count: int
    closure_dimension: int
    traceless_dimension: int
    has_identity_component: bool
    universal: bool
    basis: list = field(repr=False, default_factory=list)

    def to_dict(self):
        return {'generator_count': self.generator_count,
                'closure_dimension': self.closure_dimension,
                'traceless_dimension': self.traceless_dimension,
                'has_identity_component': self.has_identity_component,
                'universal': self.universal}


def heisenberg(K, i, j):
    """Isotropic exchange ``sum_a sigma_a^(i) sigma_a^(j)`` on ``K`` qubits."""
    if i == j:
        raise ArgumentError('Heisenberg coupling needs two distinct sites')
    return sum(pauli_on(K, i, a) @ pauli_on(K, j, a) for a in 'xyz')


def pulses_from_group(spec):
    """Pulses ``D_j = g_j g_{j-1}^dagger`` for ``j = 1..|G|`` with ``g_|G| = g_0``.

    Applying them in order after each free subinterval reproduces the
    group-conjugated cycle; their ordered product is the identity.
    """
    g = spec.group.elements if isinstance(spec, CycleSpec) else spec.elements
    n = len(g)
    return [g[j % n] @ dagger(g[j - 1]) for j in range(1, n + 1)]


def _lifted(op, dim):
    if op is None:
        return None
    op = np.asarray(op, dtype=complex)
    if op.shape[0] == dim:
        return op
    if dim % op.shape[0]:
        raise ArgumentError(f'operand dimension {op.shape[0]} incompatible with {dim}')
    return embed(op, dim // op.shape[0])


def check_window(G, window, tol=DEFAULT_TOL):
    """Raise :class:`ConstraintError` if ``window`` violates its scheme's constraints."""
    A, P = window.hamiltonian, window.pulse
    if A is not None:
        A = as_operator(A)
        if not is_hermitian(A):
            raise ConstraintError(f'{window.scheme}: Hamiltonian operand is not Hermitian')
        if A.shape[0] != G.dim:
            raise ConstraintError(f'{window.scheme}: operand dimension {A.shape[0]} does not '
                                  f'match group dimension {G.dim}')
    if window.scheme == PARALLEL_SLOW and not in_centralizer(G, A, tol):
        raise ConstraintError('parallel_slow: Hamiltonian A is not in the centralizer Z(G)')
    if window.scheme == TWISTED_SLOW:
        P = as_operator(P)
        if P.shape[0] != G.dim or not is_unitary(P):
            raise ConstraintError('twisted_slow: frame pulse P must be unitary on the system')
        # A in Z(G) is the same condition as P^dagger A P in Z(P^dagger G P)
        if A is not None and not in_centralizer(G, A, tol):
            raise ConstraintError('twisted_slow: Hamiltonian A is not in the centralizer Z(G), '
                                  'so its image is not in the twisted centralizer')


def effective_hamiltonian(spec, H, window=None, tol=DEFAULT_TOL):
    """
    First-order (fast-cycle limit) effective Hamiltonian of one window.

    ``H`` may act on system (x) bath; the group and window operands act on the
    system and are lifted as needed. ``window=None`` gives the bare decoupled
    result ``project(G, H)``.
    """
    G = spec.group if isinstance(spec, CycleSpec) else spec
    H = as_operator(H)
    d = H.shape[0]
    Gd = G.lift(d)
    base = project(Gd, H)
    if window is None:
        return base
    check_window(G, window, tol)
    op = _lifted(window.hamiltonian, d)
    if window.scheme == PARALLEL_SLOW:
        return base + op
    if window.scheme == TWISTED_SLOW:
        P = _lifted(window.pulse, d)
        total = base if op is None else base + op
        return dagger(P) @ total @ P
    if window.scheme == DRIFT_IDENTITY:
        return base + op / G.order
    return base + op


# Lie closure -------------------------------------------------------------

def _realvec(x):
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


class _RealBasis:
    """Incremental real orthonormal basis of matrices under Re tr(x^dagger y)."""

    def __init__(self, rtol):
        self.rtol = rtol
        self.vectors = []
        self.matrices = []

    def add(self, x, scale=None):
        """Append the part of ``x`` orthogonal to the basis, if it exceeds
        ``rtol * scale`` (``scale`` defaults to the norm of ``x``)."""
        scale = np.linalg.norm(x) if scale is None else scale
        if scale == 0:
            return None
        v = _realvec(x) / scale
        for _ in range(2):
            for b in self.vectors:
                v = v - np.dot(b, v) * b
        r = np.linalg.norm(v)
        if r <= self.rtol:
            return None
        v = v / r
        m = v.size // 2
        d = int(round(np.sqrt(m)))
        mat = (v[:m] + 1j * v[m:]).reshape(d, d)
        mat = 0.5 * (mat - dagger(mat))
        self.vectors.append(v)
        self.matrices.append(mat)
        return mat

    def __len__(self):
        return len(self.vectors)


def lie_closure(generators, max_dim=None, rtol=1e-8):
    """
    Real Lie algebra generated by ``{i H_k}`` under commutation.

    New directions are found breadth first by commuting fresh basis elements
    with the generators; a final sweep over all basis pairs confirms the fixed
    point. Candidates whose component orthogonal to the current basis is below
    ``rtol`` (relative) are discarded.

    The algebra is universal when its traceless part has dimension
    ``d**2 - 1``; an identity component only adds an unobservable phase.

    Raises
    ------
    ResourceError
        The basis grew beyond ``max_dim`` (default ``d**2``).
    """
    gens = [as_operator(h) for h in generators]
    if not gens:
        raise ArgumentError('lie_closure needs at least one generator')
    d = gens[0].shape[0]
    if any(h.shape[0] != d for h in gens):
        raise ArgumentError('generators have mismatched dimensions')
    max_dim = d * d if max_dim is None else max_dim
    basis = _RealBasis(rtol)

    def grow(x, scale=None):
        m = basis.add(x, scale)
        if m is not None and len(basis) > max_dim:
            raise ResourceError(f'Lie closure exceeded max_dim={max_dim}', partial_dimension=len(basis))
        return m

    igens = [1j * h for h in gens]
    frontier = [m for m in (grow(x) for x in igens) if m is not None]
    while True:
        while frontier:
            fresh = []
            for x in frontier:
                for g in igens:
                    m = grow(commutator(g, x), np.linalg.norm(g) * np.linalg.norm(x))
                    if m is not None:
                        fresh.append(m)
            frontier = fresh
        mats = list(basis.matrices)
        for a in range(len(mats)):
            for b in range(a):
                m = grow(commutator(mats[a], mats[b]), 1.0)
                if m is not None:
                    frontier.append(m)
        if not frontier:
            break

    mats = list(basis.matrices)
    traceless = _RealBasis(rtol)
    for m in mats:
        traceless.add(m - np.trace(m) / d * identity(d))
    tdim = len(traceless)
    return LieClosureReport(generator_count=len(gens), closure_dimension=len(mats),
                            traceless_dimension=tdim,
                            has_identity_component=len(mats) > tdim,
                            universal=tdim == d * d - 1, basis=mats)


def universality_audit(G, slow_set=(), fast_set=(), hamiltonian=None, tol=DEFAULT_TOL,
                       max_dim=None):
    """
    Decide whether a control repertoire gives full control of decoupled dynamics.

    Parameters
    ----------
    G : DecouplingGroup
    slow_set : sequence of ndarray
        Hamiltonians in the centralizer applied in parallel with the decoupler.
    fast_set : sequence of Window
        Windows whose schemes displace the effective Hamiltonian; only the new
        direction each contributes is used (``P^dagger A P`` for twisted
        windows, ``B`` for drift windows).
    hamiltonian : ndarray, optional
        Native system Hamiltonian; its decoupled part joins the repertoire.
    """
    directions = []
    for A in slow_set:
        check_window(G, Window(PARALLEL_SLOW, A), tol)
        directions.append(as_operator(A))
    for w in fast_set:
        check_window(G, w, tol)
        if w.scheme == PARALLEL_SLOW:
            directions.append(as_operator(w.hamiltonian))
        elif w.scheme == TWISTED_SLOW:
            if w.hamiltonian is not None:
                P = as_operator(w.pulse)
                directions.append(dagger(P) @ w.hamiltonian @ P)
        else:
            directions.append(as_operator(w.hamiltonian))
    if hamiltonian is not None:
        directions.append(project(G, hamiltonian))
    directions = [h for h in directions if np.linalg.norm(h) > 0]
    if not directions:
        d = G.dim
        return LieClosureReport(0, 0, 0, False, d == 1, [])
    return lie_closure(directions, max_dim=max_dim)
