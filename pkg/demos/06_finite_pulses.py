"""
Pulses of finite width.

Real pulses take time tau, during which the system still evolves. The
effective Hamiltonian then shifts by an amount linear in tau, so the final
state infidelity, a squared amplitude, grows like tau squared.
"""
import numpy as np

from decoupler_lab.dynamics import (cycle_propagator, dephasing_bath, extract_avg_hamiltonian,
                                    fit_loglog_slope, pulse_width_sweep)
from decoupler_lab.program import CycleSpec
from decoupler_lab.symmetrize import spin_echo

bath = dephasing_bath(1, 2, 0.5)
psi0 = np.kron(np.ones(2) / np.sqrt(2), np.eye(4)[0])
taus = [0.00125, 0.0025, 0.005, 0.01]

res = pulse_width_sweep(bath, spin_echo(), 0.04, taus, 5.0, psi0)
print(f'infidelity vs tau: slope {res.fitted_slope:.2f}')

H = bath.hamiltonian()
spec = CycleSpec(spin_echo(), 0.02)
U0 = cycle_propagator(spec, H)
H0 = extract_avg_hamiltonian(U0, 0.04)
devs = []
for tau in taus:
    U = cycle_propagator(spec, H, pulse_width=tau)
    ph = np.vdot(U.ravel(), U0.ravel())
    d = extract_avg_hamiltonian(U * ph / abs(ph), 0.04) - H0
    devs.append(np.linalg.norm(d - np.trace(d) / 8 * np.eye(8), 2))
print(f'effective Hamiltonian shift vs tau: slope {fit_loglog_slope(taus, devs)[0]:.2f}')
