"""
Pulse programs as text.

A ``.pprog`` file names a group, a subinterval, the errors it should
correct and a list of control windows. It is checked for physics
constraints, then lowered to a timed list of pulses and free segments that
can be sent to hardware or replayed in simulation.
"""
from pathlib import Path

import numpy as np

from decoupler_lab.dynamics import SimConfig, evolve_schedule, run_events
from decoupler_lab.operators import random_hermitian
from decoupler_lab.schedfmt import flatten, parse, serialize, validate

text = (Path(__file__).parent / 'twisted.pprog').read_text()
prog = parse(text)
print(serialize(prog))
print('diagnostics:', [str(d) for d in validate(prog)] or 'none')

bad = parse('group collective_pauli(2);\ndt 0.01;\nwindow slow A=pauli(1,z) cycles=5;\n')
for d in validate(bad):
    print('rejected program ->', d)

n = prog.schedule.total_cycles + 2
events = flatten(prog, n)
print(f'\n{len(events)} events over {events.total_duration:.2f} time units; '
      f'{len(events.pulses("frame"))} frame pulses; cyclic: {events.check_cyclicity()}')
for e in list(events)[:6]:
    print(f'  t={e.at:.3f} {e.kind:<7} {e.role if e.kind == "pulse" else ""}')

# Replaying the events reproduces the cycle-by-cycle simulator.
H = random_hermitian(8, 1)
psi0 = np.eye(8, dtype=complex)[0]
psi = run_events(flatten(prog, n, H), psi0)
ref = evolve_schedule(SimConfig(prog.cycle_spec, n, psi0), H, prog.schedule).final_state
print('\nevent replay vs simulator:', f'{np.max(np.abs(psi - ref)):.1e}')
