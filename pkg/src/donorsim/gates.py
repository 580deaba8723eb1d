"""Gate synthesis: compiling abstract gates into global-control pulse schedules.

Under global control every qubit feels the one always-on drive; a gate is a
sequence of resonant segments (everyone rotates about x together) and detuned
segments (the addressed qubit precesses about a tilted axis, typically through
whole revolutions so it nets an identity).  Each synthesized schedule ends
with spectators having completed whole 2*pi revolutions, so every gate lasts
an integer number of spectator periods.

Conventions: rotations are R_n(theta) = exp(-i theta (n.sigma)/2); requested
negative angles are normalized by theta -> theta + 2*pi (a 2*pi rotation is a
global phase).  Physical detunings are negative (biasing lowers the
resonance), which in the logical basis tilts the rotation axis toward +z; see
spin_model for the representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DeviceParameters, InfeasibleDetuningError, dipole_strength, max_detuning
from .propagator import ExecutionResult, PulseSchedule, PulseSegment, execute_schedule
from .spin_model import ID2, SX, SY, SZ, SpinSystem

__all__ = [
    "GateSpec",
    "CorrectionPlan",
    "GateReport",
    "spectator_period",
    "max_single_step_angle",
    "synth_x",
    "synth_y",
    "synth_hadamard",
    "synth_z",
    "synth_correction",
    "synth_cnot",
    "synth_swap",
    "synth_idle",
    "synthesize",
    "compose_parallel",
    "ideal_unitary",
    "embed_ideal",
    "compile_gate",
]

_GATE_KINDS = ("x", "y", "z", "hadamard", "cnot", "swap", "idle")
_CNOT_MODES = ("exchange", "dipole", "combined")
HADAMARD = (SX + SZ) / math.sqrt(2.0)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


@dataclass(frozen=True)
class GateSpec:
    """An abstract gate request.

    kind is one of x, y, z (rotations by theta), hadamard, cnot (targets =
    (control, target), mode exchange|dipole|combined with couplings j and/or
    separation d), swap (coupling j) and idle (duration).
    """

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None
    mode: str | None = None
    j: float | None = None
    d: float | None = None
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.kind not in _GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets) or any(t < 0 for t in self.targets):
            raise ValueError("targets must be distinct non-negative qubit indices")
        expected = {"cnot": 2, "swap": 2}.get(self.kind, 1)
        if len(self.targets) != expected:
            raise ValueError(f"{self.kind} takes {expected} target(s)")
        if self.kind in ("x", "y", "z"):
            if self.theta is None or not -2.0 * math.pi < self.theta < 2.0 * math.pi:
                raise ValueError("rotation angle must lie in (-2*pi, 2*pi)")
        if self.kind == "cnot" and (self.mode or "exchange") not in _CNOT_MODES:
            raise ValueError(f"unknown cnot mode {self.mode!r}")
        if self.kind == "idle" and (self.duration is None or self.duration < 0.0):
            raise ValueError("idle needs a non-negative duration")


@dataclass(frozen=True)
class CorrectionPlan:
    """Bookkeeping of one correction step.

    Spectators (resonant) rotate deficit + 2*pi*wrap_count; each idle target
    completes `revolutions` whole detuned revolutions in the same window.
    """

    spectator_deficit: float        # rad, in [0, 2*pi)
    wrap_count: int
    duration: float                 # s
    idle_detuning: float            # rad/s (negative: physical biasing)
    revolutions: int


@dataclass(frozen=True)
class GateReport:
    spec: GateSpec
    schedule: PulseSchedule
    ideal: np.ndarray
    achieved: np.ndarray
    fidelity: float
    step_durations: tuple[tuple[str, float], ...]
    notes: str = ""


# ---------------------------------------------------------------------------
# timing primitives
# ---------------------------------------------------------------------------

def spectator_period(p: DeviceParameters) -> float:
    """One full resonant 2*pi revolution: pi*hbar / (mu_B B_ac).  The clock tick."""
    return math.pi * p.constants.hbar / p.transverse_energy


def _omega_max(p: DeviceParameters) -> float:
    """Largest generalized Rabi energy sqrt(Omega0^2 + (hbar dw_max)^2)."""
    return math.hypot(p.transverse_energy, p.constants.hbar * max_detuning(p))


def max_single_step_angle(p: DeviceParameters) -> float:
    """Largest X-rotation angle one detuned step can imprint: 2*pi*(1 - Omega0/Omega_max)."""
    return 2.0 * math.pi * (1.0 - p.transverse_energy / _omega_max(p))


def _resonant_segment(theta: float, p: DeviceParameters, label: str) -> PulseSegment:
    """Everyone resonant, rotating R_x(theta); duration theta*hbar/(2 mu_B B_ac)."""
    return PulseSegment(duration=theta * p.constants.hbar / (2.0 * p.transverse_energy),
                        label=label)


def _detuning_for_tilt(tilt: float, p: DeviceParameters) -> float:
    """Physical (negative) detuning whose matrix z-tilt is +tilt (energy units)."""
    dw = -tilt / p.constants.hbar
    if abs(dw) > max_detuning(p) * (1.0 + 1e-9):
        raise InfeasibleDetuningError(
            f"needed detuning {abs(dw):.4e} rad/s exceeds the bound {max_detuning(p):.4e}"
        )
    return dw


def _full_revolution_segment(
    speed_ratio: float, targets: tuple[int, ...], p: DeviceParameters, label: str
) -> PulseSegment:
    """Targets detuned to Omega = speed_ratio * Omega0 complete one 2*pi revolution."""
    omega0 = p.transverse_energy
    tilt = omega0 * math.sqrt(speed_ratio**2 - 1.0)
    dw = _detuning_for_tilt(tilt, p)
    return PulseSegment(
        duration=math.pi * p.constants.hbar / (speed_ratio * omega0),
        detunings={q: dw for q in targets},
        label=label,
    )


def _normalize_angle(theta: float) -> float:
    """Map a requested angle in (-2*pi, 2*pi) to [0, 2*pi) (global-phase equivalence)."""
    return theta % (2.0 * math.pi)


def _make_schedule(
    segments: list[PulseSegment],
    p: DeviceParameters,
    system: SpinSystem,
    declared_target: np.ndarray | None = None,
    dipole: dict | None = None,
) -> PulseSchedule:
    return PulseSchedule(
        segments=tuple(segments),
        b_ac=p.b_ac,
        system=system,
        frame="rotating",
        rf_phase=0.0,
        dipole=dipole or {},
        declared_target=declared_target,
        hbar=p.constants.hbar,
        mu_b=p.constants.mu_b,
    )


def _default_system(targets: tuple[int, ...]) -> SpinSystem:
    return SpinSystem(num_donors=max(targets) + 1)


# ---------------------------------------------------------------------------
# corrections
# ---------------------------------------------------------------------------

def synth_correction(
    deficit: float,
    idle_targets: tuple[int, ...],
    p: DeviceParameters,
    extra_wraps: int = 0,
) -> tuple[list[PulseSegment], CorrectionPlan]:
    """Resonant completion of the spectators' revolution while targets idle.

    The duration is (deficit + 2*pi*k) * hbar / (2 mu_B B_ac) with the minimal
    wrap count k >= extra_wraps such that every idle target fits an integer
    number n >= 1 of whole detuned revolutions (required detuning within the
    device bound).  deficit = 0 with no extra wraps needs no correction; no
    feasible pair with k <= extra_wraps + 4 is an error (cannot happen at the
    default drive amplitude, where the revolution windows tile all durations
    beyond half a spectator period).
    """
    deficit = deficit % (2.0 * math.pi)
    if deficit < 1e-12 or 2.0 * math.pi - deficit < 1e-12:
        deficit = 0.0
    omega0 = p.transverse_energy
    hbar = p.constants.hbar
    t_spec = spectator_period(p)
    if deficit == 0.0 and extra_wraps == 0:
        return [], CorrectionPlan(0.0, 0, 0.0, 0.0, 0)
    omega_hi = _omega_max(p)
    for k in range(extra_wraps, extra_wraps + 5):
        t_c = (deficit + 2.0 * math.pi * k) * hbar / (2.0 * omega0)
        if not idle_targets:
            plan = CorrectionPlan(deficit, k, t_c, 0.0, 0)
            return [PulseSegment(duration=t_c, label="correction")], plan
        n_lo = max(1, math.ceil(t_c / t_spec - 1e-12))
        n_hi = math.floor(t_c * omega_hi / (math.pi * hbar) + 1e-12)
        if n_lo > n_hi:
            continue
        n = n_lo
        omega_req = n * math.pi * hbar / t_c
        tilt = math.sqrt(max(omega_req**2 - omega0**2, 0.0))
        dw = -tilt / hbar
        plan = CorrectionPlan(deficit, k, t_c, dw, n)
        seg = PulseSegment(duration=t_c, detunings={q: dw for q in idle_targets},
                           label="correction")
        return [seg], plan
    raise InfeasibleDetuningError("no feasible correction window found")


def _deficit_after(segments: list[PulseSegment], p: DeviceParameters) -> float:
    """Spectator angle still missing to complete whole revolutions.

    Spectators rotate only while the global drive is on; drive-gated windows
    (long dipole interactions, SWAP) freeze the spectator clock.
    """
    total = sum(seg.duration for seg in segments if seg.rf_on)
    gamma = 2.0 * p.transverse_energy / p.constants.hbar * total
    return (2.0 * math.pi - gamma % (2.0 * math.pi)) % (2.0 * math.pi)


# ---------------------------------------------------------------------------
# single-qubit gates
# ---------------------------------------------------------------------------

def _x_step_segments(theta: float, target: int, p: DeviceParameters,
                     step_label: str = "") -> list[PulseSegment]:
    """One X-rotation step: detuned target revolution, then a resonant theta."""
    speed_ratio = 2.0 * math.pi / (2.0 * math.pi - theta)
    return [
        _full_revolution_segment(speed_ratio, (target,), p,
                                 f"x{step_label} detuned revolution"),
        _resonant_segment(theta, p, f"x{step_label} resonant rotation"),
    ]


def _x_segments(theta: float, target: int, p: DeviceParameters) -> list[PulseSegment]:
    theta = _normalize_angle(theta)
    if theta == 0.0:
        return []
    cap = min(math.pi, max_single_step_angle(p) * (1.0 - 1e-12))
    if cap <= 0.0:
        raise InfeasibleDetuningError("device has no tuning range for X rotations")
    steps = max(1, math.ceil(theta / cap - 1e-12))
    per_step = theta / steps
    segments: list[PulseSegment] = []
    for i in range(steps):
        tag = f" {i + 1}/{steps}" if steps > 1 else ""
        segments.extend(_x_step_segments(per_step, target, p, tag))
    return segments


def synth_x(theta: float, target: int, p: DeviceParameters,
            system: SpinSystem | None = None) -> PulseSchedule:
    """X rotation per the two-step global-control recipe.

    Step 1 detunes the target so it completes a whole revolution while the
    spectators fall behind by theta; step 2 rotates everyone by theta.  Each
    step totals exactly one spectator period.  Angles beyond the single-step
    limit are split into equal feasible steps.
    """
    system = system or _default_system((target,))
    segments = _x_segments(theta, target, p)
    return _make_schedule(segments, p, system,
                          declared_target=embed_ideal(GateSpec("x", (target,), theta=theta),
                                                      system))


def _y_segments(theta: float, target: int, p: DeviceParameters) -> list[PulseSegment]:
    theta = _normalize_angle(theta)
    if theta == 0.0:
        return []
    omega0 = p.transverse_energy
    hbar = p.constants.hbar
    tan_phi_max = hbar * max_detuning(p) / omega0
    if tan_phi_max <= 0.0:
        raise InfeasibleDetuningError("device has no tuning range for Y rotations")
    phi_max = math.atan(tan_phi_max) * (1.0 - 1e-12)
    blocks = max(1, math.ceil(theta / (4.0 * phi_max) - 1e-12))
    phi = theta / (4.0 * blocks)
    dw = _detuning_for_tilt(omega0 * math.tan(phi), p)
    omega = omega0 / math.cos(phi)
    t_tilted = math.pi * hbar / (2.0 * omega)
    segments: list[PulseSegment] = []
    for i in range(blocks):
        tag = f" {i + 1}/{blocks}" if blocks > 1 else ""
        segments.extend(
            [
                PulseSegment(duration=t_tilted, detunings={target: dw},
                             label=f"y{tag} tilted half-revolution"),
                _resonant_segment(math.pi, p, f"y{tag} resonant pi"),
                PulseSegment(duration=t_tilted, detunings={target: dw},
                             label=f"y{tag} tilted half-revolution"),
                _resonant_segment(math.pi, p, f"y{tag} resonant pi"),
            ]
        )
    return segments


def synth_y(theta: float, target: int, p: DeviceParameters,
            system: SpinSystem | None = None) -> PulseSchedule:
    """Y rotation from alternating tilted-axis and resonant pi rotations.

    One block R_x(pi) R_n(pi) R_x(pi) R_n(pi) = R_y(4*phi) with
    tan(phi) = hbar*dw/(mu_B B_ac); angles beyond 4*phi_max repeat the block.
    A final correction step walks the spectators to a whole revolution while
    the target idles.
    """
    system = system or _default_system((target,))
    segments = _y_segments(theta, target, p)
    if segments:
        corr, _ = synth_correction(_deficit_after(segments, p), (target,), p)
        segments += corr
    return _make_schedule(segments, p, system,
                          declared_target=embed_ideal(GateSpec("y", (target,), theta=theta),
                                                      system))


def _hadamard_block(target: int, p: DeviceParameters) -> list[PulseSegment]:
    """Uncorrected Hadamard: half-revolution about (x+z)/sqrt2, tilt mu_B B_ac."""
    omega0 = p.transverse_energy
    dw = _detuning_for_tilt(omega0, p)
    duration = math.pi * p.constants.hbar / (2.0 * math.sqrt(2.0) * omega0)
    return [PulseSegment(duration=duration, detunings={target: dw}, label="hadamard pulse")]


def synth_hadamard(target: int, p: DeviceParameters,
                   system: SpinSystem | None = None) -> PulseSchedule:
    """Hadamard: one tilted half-revolution (hbar*dw = mu_B B_ac) plus correction."""
    system = system or _default_system((target,))
    segments = _hadamard_block(target, p)
    corr, _ = synth_correction(_deficit_after(segments, p), (target,), p)
    segments += corr
    return _make_schedule(segments, p, system,
                          declared_target=embed_ideal(GateSpec("hadamard", (target,)), system))


def _z_segments(theta: float, target: int, p: DeviceParameters) -> list[PulseSegment]:
    theta = _normalize_angle(theta)
    segments = _hadamard_block(target, p)
    if theta > 0.0:
        segments.append(_resonant_segment(theta, p, "z resonant rotation"))
    segments += _hadamard_block(target, p)
    return segments


def synth_z(theta: float, target: int, p: DeviceParameters,
            system: SpinSystem | None = None) -> PulseSchedule:
    """Z rotation as H R_x(theta) H with a single merged correction step."""
    system = system or _default_system((target,))
    segments = _z_segments(theta, target, p)
    corr, _ = synth_correction(_deficit_after(segments, p), (target,), p)
    segments += corr
    return _make_schedule(segments, p, system,
                          declared_target=embed_ideal(GateSpec("z", (target,), theta=theta),
                                                      system))


# ---------------------------------------------------------------------------
# two-qubit gates
# ---------------------------------------------------------------------------

def _interaction_angle() -> float:
    """Exchange pulse angle realizing exp(+i pi/8 sigma.sigma) up to global phase.

    Evolution under +J sigma.sigma generates exp(-i (Jt/hbar) sigma.sigma); the
    3*pi/8 pulse equals the required +pi/8 pulse times a global phase.
    """
    return 3.0 * math.pi / 8.0


def _cnot_segments(
    mode: str,
    control: int,
    target: int,
    p: DeviceParameters,
    j: float | None,
    d: float | None,
    extended_correction: bool,
    x_conjugation: bool = True,
) -> tuple[list[PulseSegment], dict, CorrectionPlan, str]:
    omega0 = p.transverse_energy
    hbar = p.constants.hbar
    dipole = {}
    if mode == "exchange":
        if j is None or j <= 0.0:
            raise ValueError("exchange mode needs a positive coupling j")
        sigma_coupling = j
        couplings = {(control, target): j}
    elif mode == "dipole":
        if d is None or d <= 0.0:
            raise ValueError("dipole mode needs a positive separation d")
        if p.alignment != "z":
            raise ValueError("dipole-coupled gates need z-aligned donors")
        d_coupling = dipole_strength(d, p)
        sigma_coupling = d_coupling
        couplings = {}
        dipole = {(control, target): d_coupling}
    elif mode == "combined":
        if j is None or j <= 0.0 or d is None or d <= 0.0:
            raise ValueError("combined mode needs positive j and d")
        if p.alignment != "z":
            raise ValueError("dipole-coupled gates need z-aligned donors")
        d_coupling = dipole_strength(d, p)
        sigma_coupling = j + d_coupling
        couplings = {(control, target): j}
        dipole = {(control, target): d_coupling}
    else:
        raise ValueError(f"unknown cnot mode {mode!r}")

    t_int = _interaction_angle() * hbar / sigma_coupling
    # exchange pulses last a fraction of a drive period, so the always-on field
    # stays on (it commutes with sigma.sigma); dipole-scale pulses span ~1e5
    # periods and are run drive-gated so the bare sigma_z sigma_z error term is
    # what the X-conjugation refocuses
    rf_during_interaction = mode == "exchange"

    def interact(label: str) -> PulseSegment:
        return PulseSegment(duration=t_int, couplings=couplings,
                            rf_on=rf_during_interaction, label=label)

    def x_on_control(label: str) -> PulseSegment:
        if x_conjugation:
            # control resonant pi; target detuned to a whole revolution of the
            # same duration (speed ratio 2)
            return _full_revolution_segment(2.0, (target,), p, label)
        # diagnostic variant: equal-duration idle (both qubits revolve)
        return _full_revolution_segment(2.0, (control, target), p, label)

    segments: list[PulseSegment] = []
    for seg in _hadamard_block(control, p):
        segments.append(seg.with_label("step 1 hadamard pulse"))
    corr, _ = synth_correction(_deficit_after(segments, p), (control,), p)
    segments += [s.with_label("step 1 hadamard correction") for s in corr]
    segments.append(interact("step 2 interaction"))
    segments.append(x_on_control("step 3 x on control"))
    segments.append(interact("step 4 interaction"))
    segments.append(x_on_control("step 5 x on control"))
    segments.append(_resonant_segment(math.pi / 2.0, p, "step 6 resonant pi/2 pair"))
    h2 = _hadamard_block(control, p)
    segments += [s.with_label("step 7 hadamard pulse") for s in h2]
    corr, _ = synth_correction(_deficit_after(h2, p), (control,), p)
    segments += [s.with_label("step 7 hadamard correction") for s in corr]
    final_corr, plan = synth_correction(
        _deficit_after(segments, p), (control, target), p,
        extra_wraps=1 if extended_correction else 0,
    )
    segments += [s.with_label("step 8 correction") for s in final_corr]
    notes = (f"interaction pulses realize exp(i pi/8 s.s) as 3pi/8 pulses of "
             f"{t_int * 1e9:.4g} ns each")
    return segments, dipole, plan, notes


def synth_cnot(
    mode: str,
    control: int,
    target: int,
    p: DeviceParameters,
    j: float | None = None,
    d: float | None = None,
    system: SpinSystem | None = None,
    extended_correction: bool = False,
    x_conjugation: bool = True,
) -> PulseSchedule:
    """CNOT via Hadamards, a conjugated sigma.sigma interaction pair, and X steps.

    mode selects the interaction: exchange (coupling j), dipole (separation d;
    always-on 1/d^3 coupling with its sigma_z sigma_z error term) or combined
    (j plus dipole).  extended_correction adds one extra spectator wrap to the
    final correction step; x_conjugation=False replaces the X steps with
    equal-duration idles (diagnostic for the refocusing property).
    """
    if control == target:
        raise ValueError("control and target must differ")
    system = system or _default_system((control, target))
    segments, dipole, _, notes = _cnot_segments(
        mode, control, target, p, j, d, extended_correction, x_conjugation
    )
    spec = GateSpec("cnot", (control, target), mode=mode, j=j, d=d)
    return _make_schedule(segments, p, system, declared_target=embed_ideal(spec, system),
                          dipole=dipole)


def synth_swap(j: float, qubit_a: int, qubit_b: int, p: DeviceParameters,
               system: SpinSystem | None = None) -> PulseSchedule:
    """SWAP: one exchange pulse with J*t = pi/4 (hbar units), drive gated off.

    exp(-i pi/4 sigma.sigma) is SWAP up to global phase.  The correction step
    is omitted; the residual spectator rotation of 2 mu_B B_ac t / hbar is tiny
    for exchange-scale couplings and is noted in the gate report.
    """
    if j <= 0.0:
        raise ValueError("swap needs a positive exchange coupling")
    if qubit_a == qubit_b:
        raise ValueError("swap qubits must differ")
    system = system or _default_system((qubit_a, qubit_b))
    duration = math.pi * p.constants.hbar / (4.0 * j)
    seg = PulseSegment(duration=duration, couplings={(qubit_a, qubit_b): j},
                       rf_on=False, label="swap interaction")
    spec = GateSpec("swap", (qubit_a, qubit_b), j=j)
    return _make_schedule([seg], p, system, declared_target=embed_ideal(spec, system))


def synth_idle(duration: float, p: DeviceParameters,
               system: SpinSystem | None = None) -> PulseSchedule:
    """Idle: resonant whole spectator periods (identity on everyone)."""
    t_spec = spectator_period(p)
    periods = round(duration / t_spec)
    if abs(duration - periods * t_spec) > 1e-9 * max(duration, t_spec):
        raise ValueError("idle duration must be an integer number of spectator periods")
    system = system or SpinSystem(num_donors=1)
    segments = []
    if periods:
        segments.append(PulseSegment(duration=periods * t_spec, label="idle"))
    return _make_schedule(segments, p, system,
                          declared_target=np.eye(system.dim, dtype=complex))


def synthesize(spec: GateSpec, p: DeviceParameters, system: SpinSystem | None = None,
               extended_correction: bool = False) -> PulseSchedule:
    """Dispatch a GateSpec to its synthesizer."""
    if spec.kind == "x":
        return synth_x(spec.theta, spec.targets[0], p, system)
    if spec.kind == "y":
        return synth_y(spec.theta, spec.targets[0], p, system)
    if spec.kind == "z":
        return synth_z(spec.theta, spec.targets[0], p, system)
    if spec.kind == "hadamard":
        return synth_hadamard(spec.targets[0], p, system)
    if spec.kind == "cnot":
        return synth_cnot(spec.mode or "exchange", spec.targets[0], spec.targets[1], p,
                          j=spec.j, d=spec.d, system=system,
                          extended_correction=extended_correction)
    if spec.kind == "swap":
        return synth_swap(spec.j, spec.targets[0], spec.targets[1], p, system)
    if spec.kind == "idle":
        return synth_idle(spec.duration, p, system)
    raise ValueError(f"unknown gate kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# parallel composition
# ---------------------------------------------------------------------------

def compose_parallel(specs: list[GateSpec], p: DeviceParameters,
                     system: SpinSystem | None = None,
                     extended_correction: bool = False) -> PulseSchedule:
    """Merge gates on disjoint qubit sets into one simultaneous schedule.

    Shorter gates are padded with whole-period resonant idles (exactly what
    spectators do); the merged duration is the longest component's, an integer
    number of spectator periods.
    """
    if not specs:
        raise ValueError("nothing to compose")
    seen: set[int] = set()
    for spec in specs:
        overlap = seen.intersection(spec.targets)
        if overlap:
            raise ValueError(f"gates overlap on qubits {sorted(overlap)}")
        seen.update(spec.targets)
    system = system or SpinSystem(num_donors=max(seen) + 1)
    schedules = [synthesize(spec, p, system, extended_correction) for spec in specs]
    t_spec = spectator_period(p)
    durations = [s.total_duration for s in schedules]
    t_max = max(durations)
    padded: list[list[PulseSegment]] = []
    for sched, dur in zip(schedules, durations):
        segs = list(sched.segments)
        missing = t_max - dur
        periods = round(missing / t_spec)
        if abs(missing - periods * t_spec) > 1e-9 * max(t_max, t_spec):
            raise ValueError("component durations differ by a non-integer period count")
        if periods:
            segs.append(PulseSegment(duration=periods * t_spec, label="parallel padding"))
        padded.append(segs)

    merged: list[PulseSegment] = []
    cursors = [0] * len(padded)
    consumed = [0.0] * len(padded)
    eps = 1e-15 * max(t_max, 1e-30)
    while True:
        active = [(i, segs[cursors[i]]) for i, segs in enumerate(padded)
                  if cursors[i] < len(segs)]
        if not active:
            break
        remaining = [seg.duration - consumed[i] for i, seg in active]
        dt = min(remaining)
        detunings: dict[int, float] = {}
        couplings: dict[tuple[int, int], float] = {}
        rf_states = set()
        labels = []
        for (i, seg), rem in zip(active, remaining):
            detunings.update(seg.detunings)
            couplings.update(seg.couplings)
            rf_states.add(seg.rf_on)
            if seg.label and seg.label != "parallel padding":
                labels.append(seg.label)
        if len(rf_states) > 1:
            raise ValueError("cannot compose gates that disagree on the global drive state")
        merged.append(PulseSegment(duration=dt, detunings=detunings, couplings=couplings,
                                   rf_on=rf_states.pop(), label=" | ".join(labels)))
        for (i, seg), rem in zip(active, remaining):
            if rem - dt <= eps:
                cursors[i] += 1
                consumed[i] = 0.0
            else:
                consumed[i] += dt

    dipole: dict = {}
    for sched in schedules:
        dipole.update(sched.dipole)
    target = np.eye(system.dim, dtype=complex)
    for spec in specs:
        target = embed_ideal(spec, system) @ target
    return _make_schedule(merged, p, system, declared_target=target, dipole=dipole)


# ---------------------------------------------------------------------------
# ideal unitaries and reports
# ---------------------------------------------------------------------------

def ideal_unitary(spec: GateSpec) -> np.ndarray:
    """Canonical matrix of a gate on its own qubits (global-control convention).

    Rotations follow R_n(theta) = exp(-i theta (n.sigma)/2); note X(2*pi) = -I
    (spinor sign, a pure global phase).
    """
    if spec.kind in ("x", "y", "z"):
        pauli = {"x": SX, "y": SY, "z": SZ}[spec.kind]
        half = 0.5 * spec.theta
        return math.cos(half) * ID2 - 1j * math.sin(half) * pauli
    if spec.kind == "hadamard":
        return HADAMARD.copy()
    if spec.kind == "cnot":
        return CNOT_MATRIX.copy()
    if spec.kind == "swap":
        return SWAP_MATRIX.copy()
    if spec.kind == "idle":
        return ID2.copy()
    raise ValueError(f"unknown gate kind {spec.kind!r}")


def embed_ideal(spec: GateSpec, system: SpinSystem) -> np.ndarray:
    """Ideal gate acting on its targets, identity on all other sites."""
    gate = ideal_unitary(spec)
    sites = [system.electron_site(q) for q in spec.targets]
    n = system.num_sites
    dim = system.dim
    out = np.zeros((dim, dim), dtype=complex)
    k = len(sites)
    for col in range(dim):
        bits = [(col >> (n - 1 - s)) & 1 for s in range(n)]
        gate_col = 0
        for b in (bits[s] for s in sites):
            gate_col = (gate_col << 1) | b
        for gate_row in range(2**k):
            amp = gate[gate_row, gate_col]
            if amp == 0.0:
                continue
            new_bits = list(bits)
            for idx, s in enumerate(sites):
                new_bits[s] = (gate_row >> (k - 1 - idx)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            out[row, col] += amp
    return out


def compile_gate(
    spec: GateSpec,
    p: DeviceParameters,
    system: SpinSystem | None = None,
    extended_correction: bool = False,
) -> GateReport:
    """Synthesize, execute and grade a gate against its ideal unitary."""
    from .analysis import gate_fidelity

    schedule = synthesize(spec, p, system, extended_correction)
    result: ExecutionResult = execute_schedule(schedule)
    ideal = schedule.declared_target
    fidelity = gate_fidelity(result.unitary, ideal) if schedule.segments else 1.0
    steps = tuple((seg.label, seg.duration) for seg in schedule.segments)
    notes = ""
    if spec.kind == "swap":
        gamma = 2.0 * p.transverse_energy / p.constants.hbar * schedule.total_duration
        notes = (f"correction omitted; residual spectator rotation "
                 f"{gamma:.3e} rad over the interaction window")
    return GateReport(spec=spec, schedule=schedule, ideal=ideal, achieved=result.unitary,
                      fidelity=fidelity, step_durations=steps, notes=notes)
