"""
Finite cycle-time simulation of decoupled and programmed dynamics.

The environment is an explicit finite quantum system, so the joint
system (x) bath evolution is unitary and simulated exactly. States are
sampled stroboscopically, once per decoupling cycle.

One cycle is: free subinterval, pulse ``D_1``, free subinterval, ...,
free subinterval, pulse ``D_|G|``. With finite pulse width ``tau`` each pulse
occupies the last ``tau`` of its subinterval.
"""
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import json
import math
import os

import numpy as np

from .exceptions import (ArgumentError, BoundsError, NumericalIntegrityError,
                         SynchronizationError)
from .operators import (BRANCH_GUARD, as_operator, dagger, embed, expm, identity, is_hermitian,
                        logm_principal, pauli_on, random_hermitian)
from .program import (DRIFT_IDENTITY, DRIFT_RESTORED, PARALLEL_SLOW, TWISTED_SLOW,
                      ControlSchedule, CycleSpec, Window, pulses_from_group)
from .symmetrize import project

__all__ = ['BathModel', 'SimConfig', 'Trajectory', 'SweepResult', 'dephasing_bath',
           'linear_bath', 'pulse_generator', 'segment_hamiltonians', 'cycle_propagator',
           'window_propagator', 'extract_avg_hamiltonian', 'windows_from_durations',
           'evolve_schedule', 'evolve_composite', 'run_events', 'system_state',
           'coherence_metric', 'fidelity',
           'state_infidelity', 'system_infidelity', 'unitary_distance', 'fit_loglog_slope',
           'convergence_sweep', 'pulse_width_sweep', 'final_state', 'ideal_final_state',
           'worker_count']

NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BathModel:
    """
    System coupled linearly to a finite bath.

    The joint Hamiltonian is
    ``H_S (x) 1 + 1 (x) H_B + sum_alpha E_alpha (x) B_alpha``.
    """

    system_dim: int
    H_B: np.ndarray
    couplings: tuple = ()
    H_S: np.ndarray = None

    def __post_init__(self):
        H_B = as_operator(self.H_B)
        if not is_hermitian(H_B):
            raise ArgumentError('bath Hamiltonian must be Hermitian')
        couplings = []
        for E, B in self.couplings:
            E, B = as_operator(E), as_operator(B)
            if E.shape[0] != self.system_dim or B.shape[0] != H_B.shape[0]:
                raise ArgumentError('coupling operator dimensions do not match system/bath')
            if not (is_hermitian(E) and is_hermitian(B)):
                raise ArgumentError('coupling operators must be Hermitian')
            if abs(np.trace(E)) > 1e-10:
                raise ArgumentError('system error operators must be traceless')
            couplings.append((E, B))
        H_S = np.zeros((self.system_dim,) * 2, complex) if self.H_S is None else as_operator(self.H_S)
        object.__setattr__(self, 'H_B', H_B)
        object.__setattr__(self, 'couplings', tuple(couplings))
        object.__setattr__(self, 'H_S', H_S)

    @property
    def bath_dim(self):
        return self.H_B.shape[0]

    @property
    def dim(self):
        return self.system_dim * self.bath_dim

    @property
    def tau_c(self):
        """Bath memory-time proxy ``1 / ||H_B||``; infinite for a static bath."""
        n = np.linalg.norm(self.H_B, 2)
        return math.inf if n == 0 else 1.0 / n

    def hamiltonian(self):
        d_b = self.bath_dim
        H = np.kron(self.H_S, identity(d_b)) + np.kron(identity(self.system_dim), self.H_B)
        for E, B in self.couplings:
            H = H + np.kron(E, B)
        return H


def _bath_hamiltonian(n_bath):
    # transverse-field Ising chain, normalised to unit spectral norm
    H = sum(pauli_on(n_bath, k, 'x') for k in range(1, n_bath + 1))
    for k in range(1, n_bath):
        H = H + pauli_on(n_bath, k, 'z') @ pauli_on(n_bath, k + 1, 'z')
    return H / np.linalg.norm(H, 2)


def dephasing_bath(K=1, n_bath=2, strength=0.5, bath_norm=1.0):
    """
    ``K`` system qubits dephased by ``n_bath`` bath qubits.

    Every system qubit couples as ``sigma_z^(i) (x) B_z`` with
    ``B_z = strength * mean_k sigma_z^(k)``; the bath Hamiltonian is a
    transverse-field Ising chain with spectral norm ``bath_norm``.
    """
    B = strength * sum(pauli_on(n_bath, k, 'z') for k in range(1, n_bath + 1)) / n_bath
    couplings = tuple((pauli_on(K, i, 'z'), B) for i in range(1, K + 1))
    return BathModel(2 ** K, bath_norm * _bath_hamiltonian(n_bath), couplings)


def linear_bath(K=1, n_bath=2, strength=0.5, seed=0, bath_norm=1.0):
    """Linear coupling of every ``sigma_a^(i)`` to its own random bath operator."""
    rng = np.random.default_rng(seed)
    d_b = 2 ** n_bath
    couplings = tuple((pauli_on(K, i, a), random_hermitian(d_b, rng, strength))
                      for i in range(1, K + 1) for a in 'xyz')
    return BathModel(2 ** K, random_hermitian(d_b, rng, bath_norm), couplings)


@dataclass(frozen=True, eq=False)
class SimConfig:
    spec: CycleSpec
    n_cycles: int
    initial_state: np.ndarray
    pulse_width: float = 0.0
    h_during_pulse: bool = True

    def __post_init__(self):
        if self.n_cycles < 1 or int(self.n_cycles) != self.n_cycles:
            raise ArgumentError(f'n_cycles must be a positive integer, got {self.n_cycles}')
        if self.pulse_width < 0 or (self.pulse_width > 0 and self.pulse_width >= self.spec.delta_t):
            raise ArgumentError(f'pulse width {self.pulse_width} must lie in [0, delta_t)')
        psi = np.asarray(self.initial_state, dtype=complex)
        norms = np.linalg.norm(psi, axis=0)
        if np.any(np.abs(norms - 1) > NORM_TOL):
            raise ArgumentError('initial state must be normalised')
        object.__setattr__(self, 'initial_state', psi)

    @property
    def total_time(self):
        return self.n_cycles * self.spec.cycle_time


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Stroboscopic samples: ``states[k]`` is the state after ``k`` cycles."""

    times: np.ndarray
    states: np.ndarray
    system_dim: int

    @property
    def final_state(self):
        return self.states[-1]

    def to_csv(self, values, metric='coherence'):
        buf = io.StringIO(newline='')
        w = csv.writer(buf, lineterminator='\n')
        w.writerow(['cycle_index', 'time', metric])
        for k, (t, v) in enumerate(zip(self.times, values)):
            w.writerow([k, repr(float(t)), repr(float(v))])
        return buf.getvalue()


@dataclass
class SweepResult:
    """Rows of ``(x, metric, value)`` with a log-log power-law fit.

    ``variable`` names the swept quantity, ``'t_c'`` or ``'tau'``.
    """

    rows: list
    fitted_slope: float
    prefactor: float
    monotone: bool
    variable: str = 't_c'
    config: dict = field(default_factory=dict)

    @property
    def x(self):
        return np.array([r[0] for r in self.rows])

    @property
    def values(self):
        return np.array([r[2] for r in self.rows])

    def to_csv(self):
        buf = io.StringIO(newline='')
        w = csv.writer(buf, lineterminator='\n')
        w.writerow([self.variable, 'metric', 'value'])
        for x, name, v in self.rows:
            w.writerow([repr(float(x)), name, repr(float(v))])
        return buf.getvalue()

    def sidecar(self):
        return {'variable': self.variable, 'fitted_slope': self.fitted_slope,
                'prefactor': self.prefactor, 'monotone': self.monotone, 'config': self.config}

    def write(self, path):
        """Write ``path`` (CSV) and ``path`` + ``.json`` (fit and config)."""
        with open(path, 'w', newline='') as f:
            f.write(self.to_csv())
        with open(str(path) + '.json', 'w') as f:
            json.dump(self.sidecar(), f, indent=2, sort_keys=True)
            f.write('\n')


# propagators -----------------------------------------------------------------

def pulse_generator(D, guard=BRANCH_GUARD):
    """
    Hermitian ``theta`` with ``expm(-1j * theta) == D`` up to a global phase.

    The phase is chosen to put the widest gap between eigenphases of ``D`` on
    the branch cut, which gives the smallest-angle rotation realising ``D``.
    """
    D = as_operator(D)
    phases = np.sort(np.angle(np.linalg.eigvals(D)))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    if gaps[k] <= 2 * guard:
        raise ArgumentError('pulse eigenphases fill the circle; no unambiguous generator')
    centre = phases[k] + gaps[k] / 2
    L = logm_principal(np.exp(1j * (np.pi - centre)) * D, guard)
    theta = 1j * L
    return 0.5 * (theta + dagger(theta))


def _as_spec(spec):
    if not isinstance(spec, CycleSpec):
        raise ArgumentError('expected a CycleSpec')
    return spec


def _lift(op, dim):
    op = np.asarray(op, dtype=complex)
    return op if op.shape[0] == dim else embed(op, dim // op.shape[0])


def segment_hamiltonians(spec, H, window=None):
    """Lab-frame Hamiltonian in each subinterval ``j = 0..|G|-1`` of a cycle."""
    d = H.shape[0]
    n = spec.group.order
    if window is None:
        return [H] * n
    op = None if window.hamiltonian is None else _lift(window.hamiltonian, d)
    if window.scheme in (PARALLEL_SLOW, TWISTED_SLOW):
        return [H] * n if op is None else [H + op] * n
    if window.scheme == DRIFT_IDENTITY:
        return [H + op] + [H] * (n - 1)
    if window.scheme == DRIFT_RESTORED:
        gs = spec.group.lift(d).elements
        return [H + g @ op @ dagger(g) for g in gs]
    raise ArgumentError(f'unknown scheme {window.scheme!r}')


def cycle_propagator(spec, H, pulse_width=0.0, window=None, h_during_pulse=True):
    """
    Propagator of one decoupling cycle.

    With ``pulse_width == 0`` this is the ordered product of the group
    conjugated free propagators, identity frame applied first. With finite
    width each pulse ``D_j`` is generated by a constant Hamiltonian for time
    ``pulse_width`` and the free stretch shrinks to ``delta_t - pulse_width``.
    ``h_during_pulse`` keeps the native Hamiltonian on during pulses.

    For a twisted window the frame pulses are not part of the cycle; see
    :func:`window_propagator`.
    """
    spec = _as_spec(spec)
    H = as_operator(H)
    d = H.shape[0]
    dt, tau = spec.delta_t, float(pulse_width)
    if tau < 0 or (tau > 0 and tau >= dt):
        raise ArgumentError(f'pulse width {tau} must lie in [0, delta_t={dt})')
    pulses = [_lift(D, d) for D in pulses_from_group(spec)]
    segs = segment_hamiltonians(spec, H, window)
    U = identity(d)
    for Hj, D in zip(segs, pulses):
        if tau == 0:
            U = D @ expm(-1j * Hj * dt) @ U
        else:
            theta = pulse_generator(D)
            Hp = theta / tau + (Hj if h_during_pulse else 0)
            U = expm(-1j * Hp * tau) @ expm(-1j * Hj * (dt - tau)) @ U
    return U


def window_propagator(spec, H, window, pulse_width=0.0, h_during_pulse=True):
    """Propagator of a whole window, frame pulses of twisted windows included."""
    U = cycle_propagator(spec, H, pulse_width, window, h_during_pulse)
    U = np.linalg.matrix_power(U, int(window.cycles))
    if window.scheme == TWISTED_SLOW:
        P = _lift(window.pulse, U.shape[0])
        U = dagger(P) @ U @ P
    return U


def extract_avg_hamiltonian(U, T_c):
    """Average Hamiltonian ``i log(U) / T_c`` on the principal branch."""
    L = logm_principal(U)
    H = 1j * L / T_c
    return 0.5 * (H + dagger(H))


def windows_from_durations(spec, items, rtol=1e-9):
    """
    Build windows from ``(scheme, operand, duration, pulse)`` tuples given in
    time units, enforcing that each duration is a whole number of cycles.
    """
    out = []
    for scheme, op, duration, pulse in items:
        n = duration / spec.cycle_time
        if abs(n - round(n)) > rtol * max(1.0, n) or round(n) < 1:
            raise SynchronizationError(
                f'window duration {duration} is not a whole number of cycles '
                f'(T_c={spec.cycle_time})')
        out.append(Window(scheme, op, int(round(n)), pulse))
    return ControlSchedule(tuple(out))


def _check_norm(psi, where):
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1) > NORM_TOL):
        raise NumericalIntegrityError(f'state norm drifted to {norms} at {where}')


def evolve_schedule(cfg, H_total, schedule=None):
    """
    Evolve ``cfg.initial_state`` through the schedule, one cycle at a time.

    Windows run back to back from cycle 0; cycles left over after the last
    window are plain decoupling under ``H_total``. ``initial_state`` may be a
    single vector or a ``(d, k)`` block of columns.

    Returns
    -------
    Trajectory
        ``n_cycles + 1`` stroboscopic samples, starting with the initial state.
    """
    schedule = schedule or ControlSchedule()
    spec = cfg.spec
    H = as_operator(H_total)
    d = H.shape[0]
    psi = cfg.initial_state
    if psi.shape[0] != d:
        raise ArgumentError(f'state dimension {psi.shape[0]} does not match Hamiltonian {d}')
    for w in schedule.windows:
        if int(w.cycles) != w.cycles:
            raise SynchronizationError('window does not span a whole number of cycles')
    if schedule.total_cycles > cfg.n_cycles:
        raise BoundsError(f'windows need {schedule.total_cycles} cycles, '
                          f'only {cfg.n_cycles} simulated')
    blocks = list(schedule.windows)
    rest = cfg.n_cycles - schedule.total_cycles
    if rest:
        blocks.append(None)
    states = [psi]
    for w in blocks:
        cycles = rest if w is None else w.cycles
        U = cycle_propagator(spec, H, cfg.pulse_width, w, cfg.h_during_pulse)
        P = None
        if w is not None and w.scheme == TWISTED_SLOW:
            P = _lift(w.pulse, d)
            psi = P @ psi
        for k in range(cycles):
            psi = U @ psi
            if P is not None and k == cycles - 1:
                psi = dagger(P) @ psi
            _check_norm(psi, f'cycle {len(states)}')
            states.append(psi)
    times = spec.cycle_time * np.arange(len(states))
    return Trajectory(times, np.array(states), spec.dim)


def evolve_composite(parts, H_total, initial_state, pulse_width=0.0, h_during_pulse=True):
    """
    Run consecutive decouplers, each with its own cycle.

    ``parts`` is a sequence of ``(CycleSpec, ControlSchedule or None,
    n_cycles)``. Part boundaries fall on cycle boundaries of both neighbours,
    so every part starts and ends synchronized. Sample times are cumulative.
    """
    if not parts:
        raise ArgumentError('evolve_composite needs at least one part')
    psi = np.asarray(initial_state, dtype=complex)
    states, times = [psi], [0.0]
    t = 0.0
    for spec, schedule, n in parts:
        cfg = SimConfig(spec, n, psi, pulse_width, h_during_pulse)
        traj = evolve_schedule(cfg, H_total, schedule)
        states.extend(traj.states[1:])
        times.extend(t + traj.times[1:])
        t += traj.times[-1]
        psi = traj.final_state
    return Trajectory(np.array(times), np.array(states), parts[0][0].dim)


def run_events(events, initial_state, hamiltonian=None):
    """
    Execute an event list (pulses and segments) on a state.

    Pulse events carry a system unitary and optional finite width; segment
    events carry the Hamiltonian for their duration. Operators on the system
    alone are lifted onto the joint space of ``initial_state``.
    """
    psi = np.asarray(initial_state, dtype=complex)
    d = psi.shape[0]
    for ev in events:
        if ev.kind == 'segment':
            psi = expm(-1j * _lift(ev.operator, d) * ev.duration) @ psi
        elif ev.duration == 0:
            psi = _lift(ev.operator, d) @ psi
        else:
            theta = pulse_generator(ev.operator)
            Hp = _lift(theta, d) / ev.duration
            if ev.background is not None:
                Hp = Hp + _lift(ev.background, d)
            psi = expm(-1j * Hp * ev.duration) @ psi
    _check_norm(psi, 'end of event list')
    return psi


# metrics --------------------------------------------------------------------

def system_state(psi, system_dim):
    """Bath-traced system density matrix of a joint pure state."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    m = psi.reshape(system_dim, d // system_dim)
    return m @ dagger(m)


def coherence_metric(trajectory, observable):
    """``|tr(rho_S O)|`` at every stroboscopic sample."""
    O = np.asarray(observable, dtype=complex)
    return [float(abs(np.trace(system_state(psi, trajectory.system_dim) @ O)))
            for psi in trajectory.states]


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(0.5 * (rho + dagger(rho)))
    return (v * np.sqrt(np.clip(w, 0, None))) @ dagger(v)


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    s = _psd_sqrt(rho)
    w = np.linalg.eigvalsh(0.5 * (s @ sigma @ s + dagger(s @ sigma @ s)))
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)


def state_infidelity(psi, phi):
    """``1 - |<psi|phi>|**2`` for pure joint states."""
    return float(max(0.0, 1 - abs(np.vdot(psi, phi)) ** 2))


def system_infidelity(psi, phi, system_dim):
    """Infidelity of the bath-traced system states of two joint pure states."""
    if np.shape(psi)[0] == system_dim:
        return state_infidelity(psi, phi)
    rho, sigma = system_state(psi, system_dim), system_state(phi, system_dim)
    return float(max(0.0, 1 - fidelity(rho, sigma)))


def unitary_distance(U, V):
    """Spectral-norm distance ``||U - V||``."""
    return float(np.linalg.norm(U - V, 2))


def fit_loglog_slope(x, y):
    """Least-squares ``(slope, prefactor)`` of ``y = prefactor * x**slope``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ArgumentError('log-log fit needs positive data')
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(np.exp(intercept))


def worker_count():
    """Sweep worker cap from ``DECOUPLER_LAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get('DECOUPLER_LAB_THREADS', '1')))
    except ValueError:
        return 1


def _map(fn, items):
    n = worker_count()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# sweeps ----------------------------------------------------------------------

def _system_parts(system):
    """``(H, system_dim)`` for a Hamiltonian or a BathModel."""
    if isinstance(system, BathModel):
        return system.hamiltonian(), system.system_dim
    H = as_operator(system)
    return H, None


def final_state(system, spec, n_cycles, psi0, pulse_width=0.0, h_during_pulse=True):
    H, _ = _system_parts(system)
    U = cycle_propagator(spec, H, pulse_width, h_during_pulse=h_during_pulse)
    psi = np.linalg.matrix_power(U, n_cycles) @ psi0
    _check_norm(psi, 'final state')
    return psi


def ideal_final_state(system, G, total_time, psi0):
    """State after ``total_time`` under the fast-cycle limit ``project(G, H)``."""
    H, _ = _system_parts(system)
    return expm(-1j * project(G.lift(H.shape[0]), H) * total_time) @ psi0


def _cycles_for(total_time, T_c):
    n = total_time / T_c
    if abs(n - round(n)) > 1e-6 * n:
        raise SynchronizationError(f'total time {total_time} is not a whole number of cycles '
                                   f'of length {T_c}')
    return int(round(n))


def _sweep(x, name, values, variable, config):
    rows = [(float(a), name, float(v)) for a, v in zip(x, values)]
    v = np.array([r[2] for r in rows])
    order = np.argsort([r[0] for r in rows])
    dv = np.diff(v[order])
    monotone = bool(np.all(dv >= 0) or np.all(dv <= 0))
    try:
        slope, pref = fit_loglog_slope([r[0] for r in rows], v)
    except ArgumentError:
        slope, pref = math.nan, math.nan
    return SweepResult(rows, slope, pref, monotone, variable, config)


def convergence_sweep(system, G, metric, tc_list, total_time=None, psi0=None,
                      pulse_width=0.0, reference_group=None, seed=None):
    """
    Measure how decoupling quality scales with the cycle time.

    Parameters
    ----------
    system : ndarray or BathModel
        Closed-system Hamiltonian or a system-bath model.
    G : DecouplingGroup
        Decoupler simulated at each point.
    metric : {'residual', 'defect', 'infidelity'}
        ``residual``: ``||H_avg - project(G, H)||`` from one cycle.
        ``defect``: ``||U(T_c) - expm(-i project(G, H) T_c)||`` for one cycle.
        ``infidelity``: final (system) infidelity after ``total_time`` against
        the fast-cycle limit of ``reference_group`` (default ``G``).
    tc_list : sequence of float
        At least three cycle times.
    """
    tc_list = [float(t) for t in tc_list]
    if len(tc_list) < 3:
        raise ArgumentError('a sweep needs at least three cycle times')
    H, sys_dim = _system_parts(system)
    Gd = G.lift(H.shape[0])
    target = project(Gd, H)
    ref = reference_group or G

    def point(T_c):
        spec = CycleSpec(G, T_c / G.order)
        if metric == 'residual':
            U = cycle_propagator(spec, H, pulse_width)
            return np.linalg.norm(extract_avg_hamiltonian(U, T_c) - target, 2)
        if metric == 'defect':
            U = cycle_propagator(spec, H, pulse_width)
            return unitary_distance(U, expm(-1j * target * T_c))
        if metric == 'infidelity':
            n = _cycles_for(total_time, T_c)
            psi = final_state(system, spec, n, psi0, pulse_width)
            ideal = ideal_final_state(system, ref, total_time, psi0)
            return system_infidelity(psi, ideal, sys_dim or H.shape[0])
        raise ArgumentError(f'unknown metric {metric!r}')

    values = _map(point, tc_list)
    config = {'metric': metric, 'tc_list': tc_list, 'total_time': total_time,
              'pulse_width': pulse_width, 'group_order': G.order, 'seed': seed}
    return _sweep(tc_list, metric, values, 't_c', config)


def pulse_width_sweep(system, G, T_c, tau_list, total_time, psi0, h_during_pulse=True,
                      seed=None):
    """
    Final system infidelity against the ideal (zero-width) decoupled run at the
    same ``T_c``, as a function of pulse width.
    """
    tau_list = [float(t) for t in tau_list]
    if len(tau_list) < 3:
        raise ArgumentError('a sweep needs at least three pulse widths')
    H, sys_dim = _system_parts(system)
    spec = CycleSpec(G, T_c / G.order)
    n = _cycles_for(total_time, T_c)
    ideal = final_state(system, spec, n, psi0, 0.0)

    def point(tau):
        psi = final_state(system, spec, n, psi0, tau, h_during_pulse)
        return system_infidelity(psi, ideal, sys_dim or H.shape[0])

    values = _map(point, tau_list)
    config = {'metric': 'pulse_infidelity', 'tau_list': tau_list, 't_c': T_c,
              'total_time': total_time, 'h_during_pulse': h_during_pulse, 'seed': seed}
    return _sweep(tau_list, 'pulse_infidelity', values, 'tau', config)
