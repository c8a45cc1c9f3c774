"""
Bang-bang dynamical decoupling and universal control on top of a decoupler.

Modules
-------
operators   dense operator arithmetic (Paulis, expm, principal log, norms)
symmetrize  decoupling groups, group-average projector, centralizers, twisting
program     control windows, effective Hamiltonians, Lie-closure universality
dynamics    finite cycle-time simulation with explicit finite baths
schedfmt    ``.pprog`` pulse-program parser, validator and flattener
cli         ``decoupler-lab`` command line
"""
__version__ = '0.1.0'

from .exceptions import *  # noqa: F401,F403
from .operators import (commutator, expm, hs_norm, logm_principal, pauli_on)  # noqa: F401
from .symmetrize import (DecouplingGroup, ErrorSpace, centralizer_basis,  # noqa: F401
                         collective_pauli, full_pauli, in_centralizer, is_correctable,
                         project, spin_echo, twist, verify_group)
from .program import (ControlSchedule, CycleSpec, Window, effective_hamiltonian,  # noqa: F401
                      heisenberg, lie_closure, pulses_from_group, universality_audit)
from .dynamics import (BathModel, SimConfig, convergence_sweep, cycle_propagator,  # noqa: F401
                       evolve_schedule, extract_avg_hamiltonian)
