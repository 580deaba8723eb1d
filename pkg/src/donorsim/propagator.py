"""Pulse schedules and their propagation to unitaries and population traces.

Rotating-frame segments are piecewise constant, so their propagators are exact
matrix exponentials (Hermitian eigendecomposition).  Lab-frame segments are
genuinely time dependent and are integrated with the midpoint-time Hamiltonian
at a fixed step, refined adaptively until halving the step changes the final
unitary by less than `lab_tol` in max-norm.  A single global clock spans all
lab segments; drive phases are never reset at segment boundaries.
"""

from __future__ import annotations

import ast
import io
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import _kernels
from .params import CONSTANTS, DeviceParameters, hyperfine_for_frequency, max_detuning
from .spin_model import (
    E_SX,
    E_SZ,
    SpinSystem,
    assert_hermitian,
    electron_pair_dot,
    pauli_on,
)

__all__ = [
    "PulseSegment",
    "PulseSchedule",
    "ExecutionResult",
    "EvolutionTrace",
    "propagate_constant",
    "execute_schedule",
    "trace_evolution",
    "concat_schedules",
    "validate_schedule_controls",
    "schedule_to_text",
    "schedule_from_text",
    "trace_to_csv",
]

_UEV = 1.602176634e-25  # 1 micro-eV in J


@dataclass(frozen=True)
class PulseSegment:
    """One piecewise-constant control segment.

    detunings maps donor index -> detuning omega(A) - omega_ac in rad/s
    (equivalently the per-donor hyperfine setting; the schedule file format
    stores A/A0).  couplings maps donor pairs -> exchange energy J in J.
    """

    duration: float
    detunings: Mapping[int, float] = field(default_factory=dict)
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    rf_on: bool = True
    label: str = ""

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError("segment duration must be non-negative")
        object.__setattr__(self, "detunings", dict(self.detunings))
        object.__setattr__(self, "couplings",
                           {tuple(sorted(k)): v for k, v in dict(self.couplings).items()})
        for j in self.couplings.values():
            if j < 0.0:
                raise ValueError("exchange coupling must be non-negative")

    def with_label(self, label: str) -> "PulseSegment":
        return replace(self, label=label)


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered control segments plus the context needed to execute them.

    All segments share one frame.  dipole maps donor pairs to an always-on
    dipole-dipole coupling D (J); unlike exchange it cannot be gated off, so it
    applies during every segment.  declared_target is the ideal unitary the
    schedule is meant to implement (None when unknown).
    """

    segments: tuple[PulseSegment, ...]
    b_ac: float
    system: SpinSystem
    frame: str = "rotating"
    carrier: float | None = None   # rad/s; required for lab-frame execution
    rf_phase: float = 0.0
    dipole: Mapping[tuple[int, int], float] = field(default_factory=dict)
    declared_target: np.ndarray | None = None
    hbar: float = CONSTANTS.hbar
    mu_b: float = CONSTANTS.mu_b

    def __post_init__(self):
        if self.frame not in ("rotating", "lab"):
            raise ValueError("frame must be 'rotating' or 'lab'")
        if self.frame == "lab" and self.carrier is None:
            raise ValueError("lab-frame schedules need the carrier frequency")
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "dipole",
                           {tuple(sorted(k)): v for k, v in dict(self.dipole).items()})
        for seg in self.segments:
            for q in seg.detunings:
                self.system.electron_site(q)
            for pair in seg.couplings:
                for q in pair:
                    self.system.electron_site(q)

    @property
    def transverse_energy(self) -> float:
        return self.mu_b * self.b_ac

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def replace(self, **kwargs) -> "PulseSchedule":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ExecutionResult:
    unitary: np.ndarray
    duration: float


def propagate_constant(h: np.ndarray, t: float, hbar: float = CONSTANTS.hbar) -> np.ndarray:
    """exp(-i H t / hbar) for Hermitian H, via eigendecomposition (exactly unitary)."""
    if t < 0.0:
        raise ValueError("propagation time must be non-negative")
    assert_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * (t / hbar))) @ v.conj().T


def segment_hamiltonian(schedule: PulseSchedule, segment: PulseSegment) -> np.ndarray:
    """Rotating-frame Hamiltonian of one segment on the schedule's system."""
    system = schedule.system
    n = system.num_sites
    dim = system.dim
    h = np.zeros((dim, dim), dtype=complex)
    for donor in range(system.num_donors):
        site = system.electron_site(donor)
        if segment.rf_on:
            h += schedule.transverse_energy * pauli_on(E_SX, site, n)
        dw = segment.detunings.get(donor, 0.0)
        if dw:
            h += schedule.hbar * dw * pauli_on(E_SZ, site, n)
    for (qa, qb), j in segment.couplings.items():
        if j:
            h += j * electron_pair_dot(system.electron_site(qa), system.electron_site(qb), n)
    for (qa, qb), d in schedule.dipole.items():
        if d:
            sa, sb = system.electron_site(qa), system.electron_site(qb)
            h += d * (electron_pair_dot(sa, sb, n)
                      - 3.0 * pauli_on(E_SZ, sa, n) @ pauli_on(E_SZ, sb, n))
    return h


def _execute_rotating(schedule: PulseSchedule) -> np.ndarray:
    u = np.eye(schedule.system.dim, dtype=complex)
    for seg in schedule.segments:
        if seg.duration == 0.0:
            continue
        u = propagate_constant(segment_hamiltonian(schedule, seg), seg.duration,
                               schedule.hbar) @ u
    return u


def _lab_donor_unitary(schedule: PulseSchedule, donor: int, steps_per_period: int) -> np.ndarray:
    """Stream one donor's lab-frame evolution across all segments (global clock)."""
    w_ac = schedule.carrier
    ax = schedule.transverse_energy / schedule.hbar
    period = 2.0 * math.pi / w_ac
    u = np.eye(2, dtype=complex)
    t0 = 0.0
    for seg in schedule.segments:
        if seg.duration > 0.0:
            dw = seg.detunings.get(donor, 0.0)
            # matrix z-rate: sigma_z^e = -Z, so az = -(omega_ac/2 + dw)
            az = -(0.5 * w_ac + dw)
            if seg.rf_on:
                n = max(int(math.ceil(seg.duration / period * steps_per_period)), 16)
                useg = _kernels.su2_lab_product(az, ax, -w_ac, -schedule.rf_phase,
                                                t0, seg.duration / n, n)
                useg = _kernels.nearest_unitary(useg)
            else:
                phase = az * seg.duration
                useg = np.diag([np.exp(-1j * phase), np.exp(1j * phase)])
            u = useg @ u
        t0 += seg.duration
    return u


def _execute_lab(schedule: PulseSchedule, lab_tol: float) -> np.ndarray:
    system = schedule.system
    if system.include_nuclei:
        raise NotImplementedError(
            "lab-frame execution covers electron-only systems; "
            "nuclear dynamics live in analysis.nuclear_flip_probability"
        )
    for seg in schedule.segments:
        if any(seg.couplings.values()):
            raise NotImplementedError("lab-frame execution does not support exchange coupling")
    if any(schedule.dipole.values()):
        raise NotImplementedError("lab-frame execution does not support dipole coupling")

    def assemble(steps_per_period: int) -> np.ndarray:
        u = np.array([[1.0 + 0.0j]])
        for donor in range(system.num_donors):
            u = np.kron(u, _lab_donor_unitary(schedule, donor, steps_per_period))
        return u

    steps = 64
    coarse = assemble(steps)
    while True:
        fine = assemble(2 * steps)
        if np.abs(fine - coarse).max() <= lab_tol:
            return fine
        steps *= 2
        coarse = fine
        if steps > 1 << 18:
            raise RuntimeError(
                f"lab-frame integration did not converge to {lab_tol} in max-norm"
            )


def execute_schedule(schedule: PulseSchedule, lab_tol: float = 1e-9) -> ExecutionResult:
    """Propagate a schedule to its total unitary.

    Rotating-frame segments compose exactly; lab-frame schedules are integrated
    with midpoint stepping refined until a step-halving changes the result by
    at most lab_tol in max-norm.
    """
    if schedule.frame == "rotating":
        u = _execute_rotating(schedule)
    else:
        u = _execute_lab(schedule, lab_tol)
    return ExecutionResult(unitary=u, duration=schedule.total_duration)


def concat_schedules(first: PulseSchedule, second: PulseSchedule) -> PulseSchedule:
    """Concatenate two schedules on the same system and frame."""
    if first.system != second.system:
        raise ValueError("schedules act on different systems")
    for attr in ("frame", "b_ac", "carrier", "rf_phase"):
        if getattr(first, attr) != getattr(second, attr):
            raise ValueError(f"schedules disagree on {attr}")
    if first.dipole != second.dipole:
        raise ValueError("schedules disagree on dipole couplings")
    return first.replace(segments=first.segments + second.segments, declared_target=None)


def validate_schedule_controls(schedule: PulseSchedule, p: DeviceParameters) -> None:
    """Check every segment's controls against the device's tunable ranges."""
    bound = max_detuning(p) * (1.0 + 1e-9)
    for i, seg in enumerate(schedule.segments):
        for q, dw in seg.detunings.items():
            if abs(dw) > bound:
                raise ValueError(
                    f"segment {i}: detuning {dw:.6e} on donor {q} exceeds the device bound"
                )


# ---------------------------------------------------------------------------
# population traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionTrace:
    """Uniformly sampled basis-state populations along a schedule."""

    times: np.ndarray                 # s
    populations: np.ndarray           # (num_samples, dim)
    basis_labels: tuple[str, ...]
    initial_label: str

    def __post_init__(self):
        sums = self.populations.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-9:
            raise ValueError("trace rows must sum to 1 within 1e-9")


def _resolve_state(initial, system: SpinSystem) -> tuple[np.ndarray, str]:
    labels = system.basis_labels()
    if isinstance(initial, str):
        if initial not in labels:
            raise ValueError(f"unknown basis label {initial!r}")
        psi = np.zeros(system.dim, dtype=complex)
        psi[labels.index(initial)] = 1.0
        return psi, initial
    psi = np.asarray(initial, dtype=complex)
    if psi.shape != (system.dim,):
        raise ValueError("initial state has the wrong dimension")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    return psi, "custom"


def trace_evolution(schedule: PulseSchedule, initial, samples: int = 1000) -> EvolutionTrace:
    """Sample basis populations uniformly over a rotating-frame schedule.

    The final sample applies exactly the execute_schedule propagator.  Basis
    populations are invariant under the frame map (it is diagonal), so these
    traces equally describe the lab-frame evolution.
    """
    if schedule.frame != "rotating":
        raise NotImplementedError("traces are computed in the rotating frame")
    psi0, init_label = _resolve_state(initial, schedule.system)
    labels = tuple(schedule.system.basis_labels())
    total = schedule.total_duration
    if total == 0.0:
        pops = np.abs(psi0[None, :]) ** 2
        return EvolutionTrace(np.zeros(1), pops, labels, init_label)
    if samples < 2:
        raise ValueError("need at least 2 samples")

    eigs = []
    starts = []
    t_acc = 0.0
    for seg in schedule.segments:
        if seg.duration == 0.0:
            continue
        w, v = np.linalg.eigh(segment_hamiltonian(schedule, seg))
        eigs.append((w, v))
        starts.append(t_acc)
        t_acc += seg.duration
    times = np.linspace(0.0, total, samples)
    pops = np.empty((samples, schedule.system.dim))
    seg_idx = 0
    psi_seg_start = psi0
    for i, t in enumerate(times):
        while seg_idx + 1 < len(starts) and t >= starts[seg_idx + 1] - 1e-18 * total:
            w, v = eigs[seg_idx]
            dt_full = (starts[seg_idx + 1] if seg_idx + 1 < len(starts) else total) - starts[seg_idx]
            phases = np.exp(-1j * w * (dt_full / schedule.hbar))
            psi_seg_start = v @ (phases * (v.conj().T @ psi_seg_start))
            seg_idx += 1
        w, v = eigs[seg_idx]
        phases = np.exp(-1j * w * ((t - starts[seg_idx]) / schedule.hbar))
        psi = v @ (phases * (v.conj().T @ psi_seg_start))
        pops[i] = np.abs(psi) ** 2
    return EvolutionTrace(times, pops, labels, init_label)


def trace_to_csv(trace: EvolutionTrace, stream, header: Mapping[str, object] | None = None) -> None:
    """Write a trace as CSV: `time_ns,pop_<label>,...`, 12 significant digits."""
    close = False
    if isinstance(stream, (str, bytes)):
        stream = open(stream, "w")
        close = True
    try:
        for key, val in (header or {}).items():
            stream.write(f"# {key} = {val}\n")
        stream.write("time_ns," + ",".join(f"pop_{lab}" for lab in trace.basis_labels) + "\n")
        for t, row in zip(trace.times, trace.populations):
            cells = [f"{t * 1e9:.12g}"] + [f"{x:.12g}" for x in row]
            stream.write(",".join(cells) + "\n")
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# schedule file format
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def schedule_to_text(schedule: PulseSchedule, p: DeviceParameters) -> str:
    """Serialize a schedule (units: ns for durations, ueV for couplings, A/A0 for
    hyperfine settings), stable field order."""
    out = io.StringIO()
    out.write("# donorsim schedule v1\n")
    out.write(f"frame = {schedule.frame}\n")
    out.write(f"b_ac = {_fmt(schedule.b_ac)}\n")
    out.write(f"num_donors = {schedule.system.num_donors}\n")
    out.write(f"include_nuclei = {str(schedule.system.include_nuclei).lower()}\n")
    out.write(f"alignment = {schedule.system.alignment}\n")
    out.write(f"rf_phase = {_fmt(schedule.rf_phase)}\n")
    if schedule.carrier is not None:
        out.write(f"carrier = {_fmt(schedule.carrier)}\n")
    if schedule.dipole:
        pairs = ",".join(f"{a}-{b}:{_fmt(d / _UEV)}" for (a, b), d in sorted(schedule.dipole.items()))
        out.write(f"dipole_uev = {pairs}\n")
    w_ac = schedule.carrier
    if w_ac is None:
        from .params import carrier_frequency

        w_ac = carrier_frequency(p)
    for seg in schedule.segments:
        a_parts = ",".join(
            f"{q}:{_fmt(hyperfine_for_frequency(w_ac + dw, p) / p.a0)}"
            for q, dw in sorted(seg.detunings.items())
        )
        j_parts = ",".join(f"{a}-{b}:{_fmt(j / _UEV)}" for (a, b), j in sorted(seg.couplings.items()))
        label = seg.label.replace("\n", " ")
        out.write(
            f"segment duration_ns={_fmt(seg.duration * 1e9)}"
            f" a_over_a0={a_parts} j_uev={j_parts}"
            f" rf={'on' if seg.rf_on else 'off'} label={label!r}\n"
        )
    return out.getvalue()


def _parse_pairs(text: str, cast_key) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, _, val = item.partition(":")
        out[cast_key(key)] = float(val)
    return out


def schedule_from_text(text: str, p: DeviceParameters) -> PulseSchedule:
    """Parse the schedule file format written by schedule_to_text."""
    from .params import carrier_frequency, resonant_frequency

    header: dict[str, str] = {}
    segments: list[PulseSegment] = []
    w_ac = carrier_frequency(p)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("segment "):
            fields: dict[str, str] = {}
            rest = line[len("segment "):]
            label = ""
            if " label=" in rest:
                rest, _, label_repr = rest.rpartition(" label=")
                try:
                    label = ast.literal_eval(label_repr)
                except (ValueError, SyntaxError) as exc:
                    raise ValueError(f"line {lineno}: bad label literal") from exc
            for tok in rest.split():
                key, _, val = tok.partition("=")
                fields[key] = val
            unknown = set(fields) - {"duration_ns", "a_over_a0", "j_uev", "rf"}
            if unknown:
                raise ValueError(f"line {lineno}: unknown segment fields {sorted(unknown)}")
            detunings = {
                q: resonant_frequency(frac * p.a0, p) - w_ac
                for q, frac in _parse_pairs(fields.get("a_over_a0", ""), int).items()
            }
            couplings = {
                tuple(int(x) for x in key.split("-")): j * _UEV
                for key, j in _parse_pairs(fields.get("j_uev", ""), str).items()
            }
            segments.append(
                PulseSegment(
                    duration=float(fields["duration_ns"]) * 1e-9,
                    detunings=detunings,
                    couplings=couplings,
                    rf_on=fields.get("rf", "on") == "on",
                    label=label,
                )
            )
        else:
            key, _, val = line.partition("=")
            key = key.strip()
            known = {"frame", "b_ac", "num_donors", "include_nuclei", "alignment",
                     "rf_phase", "dipole_uev", "carrier"}
            if key not in known:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            header[key] = val.strip()
    system = SpinSystem(
        num_donors=int(header.get("num_donors", "1")),
        include_nuclei=header.get("include_nuclei", "false") == "true",
        alignment=header.get("alignment", "z"),
    )
    dipole = {
        tuple(int(x) for x in key.split("-")): d * _UEV
        for key, d in _parse_pairs(header.get("dipole_uev", ""), str).items()
    }
    schedule = PulseSchedule(
        segments=tuple(segments),
        b_ac=float(header.get("b_ac", p.b_ac)),
        system=system,
        frame=header.get("frame", "rotating"),
        carrier=float(header["carrier"]) if "carrier" in header else (
            w_ac if header.get("frame") == "lab" else None
        ),
        rf_phase=float(header.get("rf_phase", "0")),
        dipole=dipole,
        hbar=p.constants.hbar,
        mu_b=p.constants.mu_b,
    )
    validate_schedule_controls(schedule, p)
    return schedule
