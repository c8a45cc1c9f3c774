"""
Computing on top of a decoupler.

Slow control inside the centralizer survives decoupling unchanged. A frame
pulse P before a window and P^dagger after it rotates the decoupler, so the
same centralizer Hamiltonian acts as P^dagger A P. Switching a Hamiltonian on
only during chosen subintervals (drift) reaches directions outside the
centralizer. The Lie closure of everything reachable decides universality.
"""
import numpy as np

from decoupler_lab.operators import PAULI, expm, kron, pauli_on
from decoupler_lab.program import (DRIFT_IDENTITY, DRIFT_RESTORED, TWISTED_SLOW, CycleSpec,
                                   Window, effective_hamiltonian, heisenberg, universality_audit)
from decoupler_lab.symmetrize import collective_pauli

G = collective_pauli(2)
A = heisenberg(2, 1, 2)
P = expm(-1j * np.pi / 4 * pauli_on(2, 1, 'y')) @ expm(-1j * np.pi / 4 * pauli_on(2, 2, 'x'))

print('exchange alone:', universality_audit(G, [A]).to_dict())

# The isotropic exchange is special: its twisted image closes a small algebra.
twisted = Window(TWISTED_SLOW, A, pulse=P)
print('exchange + its twist:', universality_audit(G, [A], [twisted]).to_dict())

# A generic anisotropic coupling from the centralizer does reach everything.
XX, YY, ZZ = (kron(p, p) for p in (PAULI['x'], PAULI['y'], PAULI['z']))
A1, A2 = XX + 0.3 * YY - 0.7 * ZZ, 0.2 * XX - YY + 0.5 * ZZ
print('generic pair, twisted:', universality_audit(G, [A1], [Window(TWISTED_SLOW, A2, pulse=P)]).to_dict())

# Drift on single-qubit fields plus the exchange is universal as well.
drift = [Window(DRIFT_RESTORED, pauli_on(2, k, a)) for k in (1, 2) for a in 'xz']
print('exchange + drift:', universality_audit(G, [A], drift).to_dict())

# The two drift schemes differ by a factor |G| in strength.
B = pauli_on(2, 1, 'x')
zero = np.zeros((4, 4))
spec = CycleSpec(G, 0.01)
for scheme in (DRIFT_IDENTITY, DRIFT_RESTORED):
    Heff = effective_hamiltonian(spec, zero, Window(scheme, B))
    print(f'{scheme}: effective strength {np.real(np.trace(Heff @ B)) / 4:.2f}')
