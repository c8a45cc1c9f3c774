"""
Decoupling groups and the group-average projector.

A decoupling group is stored as an explicit list of unitaries with the
identity first. Averaging an operator over the group,

    project(G, X) = 1/|G| sum_j g_j^dagger X g_j,

is the orthogonal (Hilbert-Schmidt) projector onto the centralizer of the
group: the operators commuting with every element.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from .exceptions import ArgumentError, ClosureError, GroupStructureError
from .operators import (PAULI, as_operator, commutator, dagger, embed, equal_up_to_phase,
                        hs_norm, identity, is_hermitian, is_unitary, kron, pauli_on)

__all__ = ['DEFAULT_TOL', 'PHASE_TOL', 'MAX_ORDER', 'DecouplingGroup', 'ErrorSpace',
           'CorrectabilityReport', 'verify_group', 'generate_group', 'project',
           'in_centralizer', 'is_correctable', 'twist', 'superoperator',
           'centralizer_basis', 'identity_group', 'spin_echo', 'collective_pauli',
           'full_pauli', 'independent_errors', 'collective_errors', 'dephasing_errors']

DEFAULT_TOL = 1e-10
PHASE_TOL = 1e-9
MAX_ORDER = 4096


@dataclass(frozen=True, eq=False)
class DecouplingGroup:
    """Validated finite group of unitaries; ``elements[0]`` is the identity.

    Build through :func:`verify_group` or one of the named constructors rather
    than directly.
    """

    elements: tuple

    @property
    def order(self):
        return len(self.elements)

    @property
    def dim(self):
        return self.elements[0].shape[0]

    def stack(self):
        return np.stack(self.elements)

    def lift(self, dim):
        """The group acting as ``g (x) 1_B`` on a space of dimension ``dim``."""
        if dim == self.dim:
            return self
        if dim % self.dim:
            raise ArgumentError(f'cannot lift group on d={self.dim} to d={dim}')
        return DecouplingGroup(tuple(embed(g, dim // self.dim) for g in self.elements))

    def contains(self, u, tol=PHASE_TOL):
        return any(equal_up_to_phase(g, u, tol) for g in self.elements)

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True, eq=False)
class ErrorSpace:
    """Traceless Hermitian error generators ``E_alpha`` on the system."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(as_operator(e) for e in self.generators)
        if not gens:
            raise ArgumentError('error space needs at least one generator')
        dims = {e.shape[0] for e in gens}
        if len(dims) != 1:
            raise ArgumentError(f'error generators have mixed dimensions {sorted(dims)}')
        for k, e in enumerate(gens):
            if not is_hermitian(e):
                raise ArgumentError(f'error generator {k} is not Hermitian')
            if abs(np.trace(e)) > 1e-10:
                raise ArgumentError(f'error generator {k} is not traceless')
        gram = np.array([[np.vdot(a, b) for b in gens] for a in gens])
        rank = np.linalg.matrix_rank(gram, tol=1e-9 * max(1.0, np.max(np.abs(gram))))
        if rank != len(gens):
            raise ArgumentError(f'error generators are linearly dependent (rank {rank} < {len(gens)})')
        object.__setattr__(self, 'generators', gens)

    @property
    def dim(self):
        return self.generators[0].shape[0]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __add__(self, other):
        return ErrorSpace(self.generators + tuple(other.generators))


class CorrectabilityReport(tuple):
    """``(correctable, residuals)``; unpacks like a 2-tuple."""

    def __new__(cls, correctable, residuals):
        return super().__new__(cls, (correctable, residuals))

    correctable = property(lambda self: self[0])
    residuals = property(lambda self: self[1])

    def __bool__(self):
        return bool(self[0])


def _index_of(elements, u, tol):
    for m, g in enumerate(elements):
        if equal_up_to_phase(g, u, tol):
            return m
    return None


def verify_group(elements, tol=PHASE_TOL):
    """
    Validate that ``elements`` form a finite group up to global phase.

    Elements are checked for unitarity, an identity element is moved to the
    front (and replaced by the exact identity), and every pairwise product
    and every inverse is located in the set up to a unit phase.

    Raises
    ------
    ArgumentError
        Empty input, mismatched dimensions or a non-unitary element.
    GroupStructureError
        No element equals the identity up to phase.
    ClosureError
        Some product ``g_j g_k`` (or inverse) is missing; ``pair`` names it.
    """
    els = [as_operator(g) for g in elements]
    if not els:
        raise ArgumentError('a group needs at least one element')
    if len(els) > MAX_ORDER:
        raise ClosureError(f'group order {len(els)} exceeds the cap {MAX_ORDER}')
    d = els[0].shape[0]
    for k, g in enumerate(els):
        if g.shape[0] != d:
            raise ArgumentError(f'element {k} has dimension {g.shape[0]}, expected {d}')
        if not is_unitary(g):
            raise ArgumentError(f'element {k} is not unitary')
    one = identity(d)
    k0 = _index_of(els, one, tol)
    if k0 is None:
        raise GroupStructureError('no element equals the identity up to a global phase')
    els = [one] + els[:k0] + els[k0 + 1:]
    for j, k in product(range(len(els)), repeat=2):
        if _index_of(els, els[j] @ els[k], tol) is None:
            raise ClosureError(f'product of elements {j} and {k} is not in the set', pair=(j, k))
    for j, g in enumerate(els):
        if _index_of(els, dagger(g), tol) is None:
            raise ClosureError(f'inverse of element {j} is not in the set', pair=(j, j))
    return DecouplingGroup(tuple(els))


def generate_group(generators, tol=PHASE_TOL, max_order=MAX_ORDER):
    """Close a generating set under multiplication (up to phase)."""
    gens = [as_operator(g) for g in generators]
    d = gens[0].shape[0]
    els = [identity(d)]
    frontier = list(els)
    while frontier:
        new = []
        for g in frontier:
            for h in gens:
                c = h @ g
                if _index_of(els, c, tol) is None:
                    els.append(c)
                    new.append(c)
                    if len(els) > max_order:
                        raise ClosureError(f'generated set exceeds {max_order} elements; '
                                           'the generators do not generate a finite group')
        frontier = new
    return verify_group(els, tol)


def _check_dim(G, x):
    if np.shape(x)[-1] != G.dim:
        raise ArgumentError(f'operator dimension {np.shape(x)[-1]} does not match group dimension {G.dim}')


def project(G, H):
    """Group average ``1/|G| sum_j g_j^dagger H g_j``."""
    H = np.asarray(H, dtype=complex)
    _check_dim(G, H)
    g = G.stack()
    return np.sum(dagger(g) @ H @ g, axis=0) / G.order


def in_centralizer(G, O, tol=DEFAULT_TOL):
    """True iff ``O`` commutes with every group element.

    ``tol`` is relative to ``hs_norm(O)``.
    """
    O = np.asarray(O, dtype=complex)
    _check_dim(G, O)
    bound = tol * max(hs_norm(O), 1e-300)
    return all(hs_norm(commutator(O, g)) <= bound for g in G.elements)


def is_correctable(G, errors, tol=DEFAULT_TOL):
    """Whether the group average annihilates every error generator.

    Returns a :class:`CorrectabilityReport` holding the verdict and the
    residual ``hs_norm(project(G, E))`` of each generator.
    """
    residuals = [hs_norm(project(G, e)) for e in errors]
    ok = all(r <= tol * hs_norm(e) for r, e in zip(residuals, errors))
    return CorrectabilityReport(ok, residuals)


def twist(G, P):
    """Conjugated group ``{P^dagger g P}``."""
    P = as_operator(P)
    _check_dim(G, P)
    if not is_unitary(P):
        raise ArgumentError('twisting operator P must be unitary')
    Pd = dagger(P)
    return DecouplingGroup((G.elements[0],) + tuple(Pd @ g @ P for g in G.elements[1:]))


def superoperator(G):
    """Matrix of the group average acting on row-major vectorized operators."""
    g = G.stack()
    return sum(np.kron(dagger(u), u.T) for u in g) / G.order


def centralizer_basis(G, rtol=1e-9):
    """
    Hilbert-Schmidt orthonormal basis of the centralizer.

    The projector is applied to all ``d**2`` matrix units and the resulting
    columns are orthonormalized by SVD, keeping singular values above
    ``rtol`` times the largest.
    """
    d = G.dim
    images = np.empty((d * d, d * d), dtype=complex)
    for k in range(d * d):
        unit = np.zeros(d * d, dtype=complex)
        unit[k] = 1
        images[:, k] = project(G, unit.reshape(d, d)).ravel()
    u, s, _ = np.linalg.svd(images)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return [u[:, k].reshape(d, d) for k in range(rank)]


# named constructors ---------------------------------------------------------

def identity_group(d):
    return DecouplingGroup((identity(d),))


def spin_echo():
    """Single-qubit group ``{1, sigma_x}``."""
    return verify_group([PAULI['i'], PAULI['x']])


def collective_pauli(K):
    """``{1, X^K, Y^K, Z^K}``: collective pi rotations of ``K`` qubits."""
    return verify_group([identity(2 ** K)] + [kron(*[PAULI[a]] * K) for a in 'xyz'])


def full_pauli(K):
    """All ``4**K`` Pauli products on ``K`` qubits (maximal averaging)."""
    els = [kron(*ps) for ps in product(*[[PAULI[a] for a in 'ixyz']] * K)]
    return DecouplingGroup(tuple(els))


def independent_errors(K):
    """Independent decoherence: every single-qubit Pauli, ``3K`` generators."""
    return ErrorSpace(tuple(pauli_on(K, i, a) for i in range(1, K + 1) for a in 'xyz'))


def collective_errors(K):
    """Collective decoherence: ``sum_i sigma_a^(i)`` for each axis."""
    return ErrorSpace(tuple(sum(pauli_on(K, i, a) for i in range(1, K + 1)) for a in 'xyz'))


def dephasing_errors(K):
    """Independent pure dephasing: ``sigma_z^(i)`` for each qubit."""
    return ErrorSpace(tuple(pauli_on(K, i, 'z') for i in range(1, K + 1)))
