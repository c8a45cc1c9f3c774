"""
Dense operator arithmetic on finite Hilbert spaces.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``; the helpers
here build them (Paulis, tensor embeddings, random instances), apply matrix
functions, and measure them. Everything is pure: inputs are never mutated.

Natural units are used throughout (hbar = 1), so a propagator over time ``t``
is ``expm(-1j * H * t)``.
"""
from dataclasses import dataclass
from functools import reduce
import json
import math

import numpy as np
from scipy import linalg as sla
from scipy.stats import unitary_group

from .exceptions import ArgumentError, BranchCutError

__all__ = ['MAX_DIM', 'HERMITIAN_TOL', 'UNITARY_TOL', 'BRANCH_GUARD', 'PAULI',
           'HilbertFactorization', 'as_operator', 'identity', 'dagger', 'kron',
           'pauli_on', 'embed', 'expm', 'logm_principal', 'commutator',
           'hs_inner', 'hs_norm', 'is_hermitian', 'is_unitary', 'phase_align',
           'equal_up_to_phase', 'partial_trace', 'random_hermitian',
           'random_unitary', 'operator_to_json', 'operator_from_json',
           'operator_to_dict', 'operator_from_dict']

MAX_DIM = 256
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
# radians kept clear of the -1 branch cut by logm_principal
BRANCH_GUARD = 1e-6

PAULI = {
    'i': np.eye(2, dtype=complex),
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class HilbertFactorization:
    """Tensor-product splitting of a Hilbert space, e.g. ``(2, 2, 4)``."""

    subsystem_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subsystem_dims)
        if not dims or any(d < 1 for d in dims):
            raise ArgumentError(f'subsystem dimensions must be positive, got {dims}')
        object.__setattr__(self, 'subsystem_dims', dims)

    @property
    def dim(self):
        return math.prod(self.subsystem_dims)

    @classmethod
    def qubits(cls, K, bath_dim=None):
        dims = (2,) * K
        return cls(dims + ((bath_dim,) if bath_dim else ()))

    def check(self, op):
        if np.shape(op)[0] != self.dim:
            raise ArgumentError(f'operator dimension {np.shape(op)[0]} does not match '
                                f'factorization {self.subsystem_dims}')


def as_operator(x):
    """Return ``x`` as a square complex array, validating shape and finiteness."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ArgumentError(f'operator must be square, got shape {arr.shape}')
    if arr.shape[0] > MAX_DIM:
        raise ArgumentError(f'dimension {arr.shape[0]} exceeds supported maximum {MAX_DIM}')
    if not np.all(np.isfinite(arr)):
        raise ArgumentError('operator has non-finite entries')
    return arr


def identity(d):
    return np.eye(d, dtype=complex)


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def kron(*ops):
    return reduce(np.kron, ops)


def _axis(axis):
    key = str(axis).lower()
    if key not in ('x', 'y', 'z'):
        raise ArgumentError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return key


def pauli_on(K, site, axis):
    """Pauli matrix ``axis`` acting on qubit ``site`` (1-based) of ``K`` qubits."""
    if K < 1:
        raise ArgumentError(f'need at least one qubit, got K={K}')
    if not 1 <= site <= K:
        raise ArgumentError(f'site {site} out of range 1..{K}')
    factors = [PAULI['i']] * K
    factors[site - 1] = PAULI[_axis(axis)]
    return kron(*factors)


def embed(op, bath_dim):
    """Lift a system operator to system (x) bath as ``op (x) 1_B``."""
    if bath_dim == 1:
        return np.asarray(op, dtype=complex)
    return np.kron(op, identity(bath_dim))


def expm(x):
    """Matrix exponential by Pade scaling and squaring (order 13)."""
    return sla.expm(as_operator(x))


def logm_principal(u, guard=BRANCH_GUARD):
    """
    Principal logarithm of a unitary.

    The unitary is brought to (diagonal) complex Schur form and the phase of
    every eigenvalue is taken in ``(-pi, pi)``. The result ``L`` is
    anti-Hermitian with ``expm(L) == u``.

    Raises
    ------
    BranchCutError
        If an eigenvalue phase lies within ``guard`` radians of ``pi``.
    """
    u = as_operator(u)
    t, z = sla.schur(u, output='complex')
    phases = np.angle(np.diag(t))
    worst = np.max(np.abs(phases))
    if np.pi - worst <= guard:
        raise BranchCutError(
            f'eigenvalue phase {worst:.12g} is within {guard:g} rad of the branch cut; '
            'reduce the evolution time')
    log = (z * (1j * phases)) @ dagger(z)
    return 0.5 * (log - dagger(log))


def commutator(x, y):
    if np.shape(x) != np.shape(y):
        raise ArgumentError(f'dimension mismatch: {np.shape(x)} vs {np.shape(y)}')
    return x @ y - y @ x


def hs_inner(x, y):
    """Hilbert-Schmidt inner product ``tr(x^dagger y)``."""
    return np.vdot(x, y)


def hs_norm(x):
    return float(np.linalg.norm(x))


def is_hermitian(x, tol=HERMITIAN_TOL):
    x = np.asarray(x)
    return x.ndim == 2 and x.shape[0] == x.shape[1] and np.max(np.abs(x - dagger(x)), initial=0) <= tol


def is_unitary(x, tol=UNITARY_TOL):
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    return np.max(np.abs(x @ dagger(x) - np.eye(x.shape[0])), initial=0) <= tol


def phase_align(g, h):
    """Unit phase ``phi`` making ``phi * h`` closest to ``g``, read off the
    largest-magnitude entry of ``h``."""
    k = np.unravel_index(np.argmax(np.abs(h)), h.shape)
    if abs(h[k]) == 0:
        return 1.0 + 0j
    ratio = g[k] / h[k]
    return ratio / abs(ratio) if ratio != 0 else 1.0 + 0j


def equal_up_to_phase(g, h, tol=1e-9):
    if np.shape(g) != np.shape(h):
        return False
    return np.max(np.abs(g - phase_align(g, h) * h)) <= tol


def partial_trace(rho, dims, keep):
    """
    Reduce a density matrix on ``prod(dims)`` to the subsystems in ``keep``.

    Parameters
    ----------
    rho : ndarray, shape (d, d)
    dims : sequence of int
    keep : sequence of int
        Zero-based subsystem indices to retain, in ascending order.
    """
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    traced = [i for i in range(n) if i not in keep]
    t = np.asarray(rho).reshape(dims + dims)
    # trace out from the highest index so positions stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        remaining = n - count
        t = np.trace(t, axis1=i, axis2=i + remaining)
    d_keep = math.prod(dims[i] for i in keep)
    return t.reshape(d_keep, d_keep)


def random_hermitian(d, rng=None, norm=1.0):
    """Gaussian Hermitian matrix rescaled to spectral norm ``norm``."""
    rng = np.random.default_rng(rng)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (a + dagger(a))
    return norm * h / np.linalg.norm(h, 2)


def random_unitary(d, rng=None):
    """Haar-random unitary."""
    rng = np.random.default_rng(rng)
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=complex)


def operator_to_dict(x):
    x = np.asarray(x, dtype=complex)
    return {'dim': int(x.shape[0]), 're': x.real.tolist(), 'im': x.imag.tolist()}


def operator_from_dict(doc):
    try:
        d = int(doc['dim'])
        re = np.asarray(doc['re'], dtype=float)
        im = np.asarray(doc.get('im', np.zeros((d, d))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArgumentError(f'malformed operator document: {exc}') from exc
    if re.shape != (d, d) or im.shape != (d, d):
        raise ArgumentError(f'operator document entries do not match dim={d}')
    return as_operator(re + 1j * im)


def operator_to_json(x):
    return json.dumps(operator_to_dict(x))


def operator_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f'invalid operator JSON: {exc}') from exc
    return operator_from_dict(doc)
