"""
How fast the cycle average approaches the group average.

The Hamiltonian read off one finite cycle differs from the ideal group
average by an amount proportional to the cycle time, and the one-cycle
propagator differs from the ideal one at second order.
"""
import numpy as np

from decoupler_lab.dynamics import convergence_sweep
from decoupler_lab.operators import random_hermitian
from decoupler_lab.symmetrize import collective_pauli

H = random_hermitian(4, 7)
G = collective_pauli(2)
tcs = np.logspace(-3, -1, 7)
for metric in ('residual', 'defect'):
    res = convergence_sweep(H, G, metric, tcs, seed=7)
    print(f'{metric:>8}: slope {res.fitted_slope:.3f}, prefactor {res.prefactor:.3f}')
    for x, _, v in res.rows:
        print(f'          T_c={x:.2e}  {v:.3e}')
