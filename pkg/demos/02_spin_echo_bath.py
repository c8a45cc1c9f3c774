"""
Suppressing dephasing from a finite quantum bath.

One qubit couples through sigma_z to two bath qubits whose own dynamics has
unit spectral norm, so the bath memory time is about one time unit. Cycling
the spin echo much faster than that keeps the qubit coherent.
"""
import numpy as np

from decoupler_lab.dynamics import (SimConfig, coherence_metric, dephasing_bath, evolve_schedule,
                                    final_state, ideal_final_state, system_infidelity)
from decoupler_lab.operators import expm, pauli_on
from decoupler_lab.program import CycleSpec
from decoupler_lab.symmetrize import identity_group, spin_echo

bath = dephasing_bath(K=1, n_bath=2, strength=0.5)
H = bath.hamiltonian()
psi0 = np.kron(np.ones(2) / np.sqrt(2), np.eye(bath.bath_dim)[0])
T = 5.0
print(f'bath memory time tau_c = {bath.tau_c:.2f}')

ideal = ideal_final_state(bath, spin_echo(), T, psi0)
free = system_infidelity(expm(-1j * H * T) @ psi0, ideal, 2)
print(f'free evolution, infidelity after T={T}: {free:.3e}')

print('\n  T_c     infidelity')
for T_c in (0.1, 0.05, 0.02, 0.01, 0.005):
    psi = final_state(bath, CycleSpec(spin_echo(), T_c / 2), int(round(T / T_c)), psi0)
    print(f'{T_c:6.3f}   {system_infidelity(psi, ideal, 2):.3e}')

# Coherence <X> sampled once per cycle, with and without pulses.
spec = CycleSpec(spin_echo(), 0.005)
dec = coherence_metric(evolve_schedule(SimConfig(spec, 500, psi0), H), pauli_on(1, 1, 'x'))
bare = coherence_metric(evolve_schedule(SimConfig(CycleSpec(identity_group(2), 0.01), 500, psi0), H),
                        pauli_on(1, 1, 'x'))
print(f'\n<X> after t=5: decoupled {dec[-1]:.4f}, free {bare[-1]:.4f}')
