"""Fidelity metrics, analytic oracles and the summary timing tables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels, gates
from .params import (
    CONSTANTS,
    DeviceParameters,
    PhysicalConstants,
    canonical_detuning_span,
    carrier_frequency,
    dipole_strength,
    exchange_strength,
    hyperfine_for_frequency,
    local_control_tradeoff,
    max_detuning,
)
from .propagator import PulseSchedule, PulseSegment, execute_schedule
from .spin_model import SpinSystem, single_donor_static

__all__ = [
    "gate_fidelity",
    "spectator_fidelity",
    "rabi_probability",
    "TimescaleRow",
    "timescale_table",
    "lab_realization",
    "nuclear_flip_probability",
    "frozen_nucleus_check",
    "sweep",
    "SWEEP_METRICS",
]


def _assert_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > tol:
        raise ValueError("matrix is not unitary within tolerance")


def gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-invariant overlap |Tr(U^dag V)| / dim of two unitaries."""
    if u.shape != v.shape:
        raise ValueError("unitaries have different dimensions")
    _assert_unitary(u)
    _assert_unitary(v)
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


def spectator_fidelity(u: np.ndarray, gate: np.ndarray, targets: Sequence[int],
                       system: SpinSystem) -> float:
    """How close the non-target action of `u` is to the identity.

    Contracts the target legs of `u` against the ideal gate; for an exactly
    factorized u = phase * (gate (x) S) the result is |Tr S| / dim normalized
    by the contraction's scale, i.e. 1 iff S is the identity up to phase.
    """
    n = system.num_sites
    sites = [system.electron_site(q) for q in targets]
    spec_sites = [s for s in range(n) if s not in sites]
    k, m = len(sites), len(spec_sites)
    dim_s = 2**m
    block = np.zeros((dim_s, dim_s), dtype=complex)
    for grow in range(2**k):
        for gcol in range(2**k):
            weight = np.conj(gate[grow, gcol])
            if weight == 0.0:
                continue
            for srow in range(dim_s):
                for scol in range(dim_s):
                    row = _merge_bits(grow, srow, sites, spec_sites, n)
                    col = _merge_bits(gcol, scol, sites, spec_sites, n)
                    block[srow, scol] += weight * u[row, col]
    block /= 2**k
    scale = math.sqrt(max(np.trace(block.conj().T @ block).real / dim_s, 1e-300))
    return float(abs(np.trace(block)) / (dim_s * scale))


def _merge_bits(gate_idx: int, spec_idx: int, sites: Sequence[int],
                spec_sites: Sequence[int], n: int) -> int:
    bits = [0] * n
    for pos, s in enumerate(sites):
        bits[s] = (gate_idx >> (len(sites) - 1 - pos)) & 1
    for pos, s in enumerate(spec_sites):
        bits[s] = (spec_idx >> (len(spec_sites) - 1 - pos)) & 1
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def rabi_probability(t: float, delta_omega: float, b_ac: float,
                     constants: PhysicalConstants = CONSTANTS) -> float:
    """Driven two-level excitation probability from |0>.

    (mu_B B_ac / Omega)^2 sin^2(Omega t / hbar),
    Omega^2 = (mu_B B_ac)^2 + hbar^2 dw^2.
    """
    if t < 0.0:
        raise ValueError("time must be non-negative")
    transverse = constants.mu_b * b_ac
    omega = math.hypot(transverse, constants.hbar * delta_omega)
    return (transverse / omega) ** 2 * math.sin(omega * t / constants.hbar) ** 2


# ---------------------------------------------------------------------------
# timescale summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimescaleRow:
    scheme: str
    t_x: float
    t2_over_tx: float
    t_cnot: float | None
    t2_over_tcnot: float | None
    note: str = ""


def timescale_table(p: DeviceParameters, t2: float = 0.060,
                    local_b_ac: float = 1e-5) -> list[TimescaleRow]:
    """Electron-spin timescale rows for local vs global control.

    The local row evaluates the canonical scheme at B_ac = 1e-5 T with qubits
    parked a full hyperfine span off resonance; its CNOT time has no closed
    form here and is reported as an order-of-magnitude note.  The global row
    times the synthesized corrected X gate and the published-style CNOT (one
    extra spectator wrap in the final correction, interaction steps of 0.01 ns).
    """
    tradeoff = local_control_tradeoff(local_b_ac, canonical_detuning_span(p), p.constants)
    local = TimescaleRow(
        scheme="e-spin (local control)",
        t_x=tradeoff.pi_time,
        t2_over_tx=t2 / tradeoff.pi_time,
        t_cnot=None,
        t2_over_tcnot=None,
        note="T_CNOT O(10 us): exchange-gate estimate, no closed form here",
    )
    t_x = gates.synth_x(math.pi, 0, p).total_duration
    j = 3.0 * math.pi * p.constants.hbar / (8.0 * 1e-11)  # 0.01 ns interaction steps
    t_cnot = gates.synth_cnot("exchange", 0, 1, p, j=j, extended_correction=True).total_duration
    global_row = TimescaleRow(
        scheme="e-spin (global control)",
        t_x=t_x,
        t2_over_tx=t2 / t_x,
        t_cnot=t_cnot,
        t2_over_tcnot=t2 / t_cnot,
    )
    return [local, global_row]


# ---------------------------------------------------------------------------
# frozen-nucleus oracle
# ---------------------------------------------------------------------------

def lab_realization(schedule: PulseSchedule, p: DeviceParameters) -> PulseSchedule:
    """The same control sequence expressed as a lab-frame schedule."""
    if schedule.frame == "lab":
        return schedule
    return schedule.replace(frame="lab", carrier=carrier_frequency(p))


def _donor_segments(schedule: PulseSchedule, donor: int):
    for seg in schedule.segments:
        if any(seg.couplings.values()):
            raise ValueError("the nuclear oracle covers single-qubit schedules only")
        yield seg.duration, seg.detunings.get(donor, 0.0), seg.rf_on


def _donor4_evolution(schedule: PulseSchedule, donor: int, p: DeviceParameters,
                      steps_per_period: int, include_nuclear_drive: bool) -> np.ndarray:
    """Lab-frame propagator of one donor's electron (x) nucleus pair."""
    c = p.constants
    w_ac = carrier_frequency(p)
    period = 2.0 * math.pi / w_ac
    gx_e = p.transverse_energy / c.hbar
    gx_n = -c.g_n * c.mu_n * p.b_ac / c.hbar if include_nuclear_drive else 0.0
    u = np.eye(4, dtype=complex)
    t0 = 0.0
    for duration, dw, rf_on in _donor_segments(schedule, donor):
        if duration > 0.0:
            # the schedule's detuning convention counts the full level-splitting
            # shift; the physical hyperfine value that produces the same
            # generalized Rabi frequency sits at half that resonance offset
            a_phys = hyperfine_for_frequency(w_ac + 2.0 * dw, p)
            w_static, v_static = np.linalg.eigh(single_donor_static(a_phys, p))
            n = max(int(math.ceil(duration / period * steps_per_period)), 16)
            dt = duration / n
            e_half = (v_static * np.exp(-1j * w_static * (dt / (2.0 * c.hbar)))) @ v_static.conj().T
            useg = _kernels.donor4_strang_product(
                e_half, gx_e if rf_on else 0.0, -1.0, gx_n if rf_on else 0.0,
                w_ac, schedule.rf_phase, t0, dt, n)
            u = _kernels.nearest_unitary(useg) @ u
        t0 += duration
    return u


def frozen_nucleus_check(
    schedule: PulseSchedule,
    p: DeviceParameters,
    donor: int | None = None,
    tol: float = 1e-6,
    include_nuclear_drive: bool = False,
) -> tuple[float, float]:
    """Full electron (x) nucleus simulation of a single-qubit schedule.

    Returns (flip_probability, electron_fidelity_deviation): the worst final
    nuclear-spin-down population over computational-basis electron starts with
    the nucleus up, and the worst deviation of the conditional electron state
    from the electron-only rotating-frame result.  The integration step is
    refined until halving changes the propagator by at most tol in max-norm.
    """
    if schedule.system.include_nuclei:
        raise ValueError("pass the electron-only schedule; the oracle adds the nucleus")
    if donor is None:
        touched = {q for seg in schedule.segments for q in seg.detunings}
        donor = min(touched) if touched else 0

    steps = 64
    coarse = _donor4_evolution(schedule, donor, p, steps, include_nuclear_drive)
    while True:
        fine = _donor4_evolution(schedule, donor, p, 2 * steps, include_nuclear_drive)
        if np.abs(fine - coarse).max() <= tol:
            break
        coarse = fine
        steps *= 2
        if steps > 1 << 16:
            raise RuntimeError("nuclear oracle did not converge")

    # electron-only reference: the donor's local rotating-frame schedule
    local = schedule.replace(
        system=SpinSystem(num_donors=1),
        segments=tuple(
            PulseSegment(
                duration=seg.duration,
                detunings={0: seg.detunings[donor]} if donor in seg.detunings else {},
                rf_on=seg.rf_on,
                label=seg.label,
            )
            for seg in schedule.segments
        ),
        declared_target=None,
    )
    u_ref = execute_schedule(local).unitary

    # frame-map the electron part at the final time (diagonal, per electron)
    total = schedule.total_duration
    phase = 0.5 * carrier_frequency(p) * total
    r4 = np.kron(np.diag([np.exp(-1j * phase), np.exp(1j * phase)]), np.eye(2))
    u_map = r4 @ fine

    flip = 0.0
    fdev = 0.0
    for e_idx in (0, 1):
        psi0 = np.zeros(4, dtype=complex)
        psi0[e_idx * 2] = 1.0  # nucleus up
        psi = u_map @ psi0
        p_down = abs(psi[1]) ** 2 + abs(psi[3]) ** 2
        flip = max(flip, p_down)
        cond = np.array([psi[0], psi[2]])
        target = u_ref @ np.eye(2, dtype=complex)[:, e_idx]
        fdev = max(fdev, abs(1.0 - abs(np.vdot(target, cond)) ** 2))
    return flip, fdev


def nuclear_flip_probability(schedule: PulseSchedule, p: DeviceParameters,
                             donor: int | None = None, tol: float = 1e-6) -> float:
    """Worst-case nuclear spin-flip probability of a single-qubit schedule."""
    flip, _ = frozen_nucleus_check(schedule, p, donor=donor, tol=tol)
    return flip


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

def _metric_spectator_period_ns(p: DeviceParameters) -> float:
    return gates.spectator_period(p) * 1e9


def _metric_x_gate_ns(p: DeviceParameters) -> float:
    return gates.synth_x(math.pi, 0, p).total_duration * 1e9


def _metric_hadamard_ns(p: DeviceParameters) -> float:
    return gates.synth_hadamard(0, p).total_duration * 1e9


def _metric_y_gate_ns(p: DeviceParameters) -> float:
    return gates.synth_y(math.pi, 0, p).total_duration * 1e9


def _metric_z_gate_ns(p: DeviceParameters) -> float:
    return gates.synth_z(math.pi, 0, p).total_duration * 1e9


def _metric_cnot_exchange_ns(p: DeviceParameters) -> float:
    return gates.synth_cnot("exchange", 0, 1, p,
                            j=exchange_strength(p.d, p)).total_duration * 1e9


def _metric_cnot_dipole_ns(p: DeviceParameters) -> float:
    return gates.synth_cnot("dipole", 0, 1, p, d=p.d).total_duration * 1e9


def _metric_cnot_combined_ns(p: DeviceParameters) -> float:
    return gates.synth_cnot("combined", 0, 1, p, j=exchange_strength(p.d, p),
                            d=p.d).total_duration * 1e9


def _metric_max_detuning_rad_s(p: DeviceParameters) -> float:
    return max_detuning(p)


def _metric_exchange_uev(p: DeviceParameters) -> float:
    return exchange_strength(p.d, p) / 1.602176634e-25


def _metric_dipole_uev(p: DeviceParameters) -> float:
    return dipole_strength(p.d, p) / 1.602176634e-25


def _metric_local_pi_time_us(p: DeviceParameters) -> float:
    return local_control_tradeoff(1e-5, canonical_detuning_span(p),
                                  p.constants).pi_time * 1e6


SWEEP_METRICS = {
    "spectator_period_ns": _metric_spectator_period_ns,
    "x_gate_ns": _metric_x_gate_ns,
    "hadamard_ns": _metric_hadamard_ns,
    "y_gate_ns": _metric_y_gate_ns,
    "z_gate_ns": _metric_z_gate_ns,
    "cnot_exchange_ns": _metric_cnot_exchange_ns,
    "cnot_dipole_ns": _metric_cnot_dipole_ns,
    "cnot_combined_ns": _metric_cnot_combined_ns,
    "max_detuning_rad_s": _metric_max_detuning_rad_s,
    "exchange_uev": _metric_exchange_uev,
    "dipole_uev": _metric_dipole_uev,
    "local_pi_time_us": _metric_local_pi_time_us,
}


def sweep(grid: Mapping[str, Sequence[float]], metric: str,
          p: DeviceParameters) -> list[dict]:
    """Evaluate a named metric over a grid of device-parameter overrides.

    Grid keys are DeviceParameters field names; rows come out in the
    deterministic product order of the given ranges.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be non-empty")
    if metric not in SWEEP_METRICS:
        raise ValueError(f"unknown metric {metric!r}; known: {sorted(SWEEP_METRICS)}")
    fn = SWEEP_METRICS[metric]
    keys = list(grid.keys())
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        rows.append({**overrides, metric: fn(p.replace(**overrides))})
    return rows
