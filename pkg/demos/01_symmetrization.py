"""
Group averaging and error correctability.

A decoupling group G averages any Hamiltonian onto the operators that
commute with every element of G. Error operators that average to zero are
removed from the dynamics to first order in the cycle time.
"""
import numpy as np

from decoupler_lab import centralizer_basis, collective_pauli, full_pauli, project, spin_echo
from decoupler_lab.operators import pauli_on
from decoupler_lab.program import heisenberg
from decoupler_lab.symmetrize import independent_errors, is_correctable

np.set_printoptions(precision=3, suppress=True)

# The spin echo {1, X} flips Z and leaves X alone.
G = spin_echo()
print('spin echo, Z ->\n', project(G, pauli_on(1, 1, 'z')).real)
print('spin echo, X ->\n', project(G, pauli_on(1, 1, 'x')).real)

# Collective Paulis on two qubits remove every single-qubit term but keep
# the isotropic exchange coupling, which commutes with XX, YY and ZZ.
G2 = collective_pauli(2)
report = is_correctable(G2, independent_errors(2))
print('\ncollective_pauli(2) corrects all 6 single-qubit errors:', report.correctable)
A = heisenberg(2, 1, 2)
print('exchange coupling survives averaging:', np.allclose(project(G2, A), A))
print('centralizer dimension:', len(centralizer_basis(G2)))

# The full single-qubit Pauli group leaves only multiples of the identity.
print('\nfull_pauli(1) centralizer dimension:', len(centralizer_basis(full_pauli(1))))
