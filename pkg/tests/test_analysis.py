import math

import numpy as np
import pytest

from donorsim.analysis import (
    SWEEP_METRICS,
    frozen_nucleus_check,
    gate_fidelity,
    lab_realization,
    nuclear_flip_probability,
    rabi_probability,
    spectator_fidelity,
    sweep,
    timescale_table,
)
from donorsim.gates import spectator_period, synth_x, synth_z
from donorsim.params import max_detuning
from donorsim.spin_model import SX, SpinSystem


def _haar(dim, rng):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_gate_fidelity_basics(rng):
    u = _haar(4, rng)
    assert gate_fidelity(u, u) == pytest.approx(1.0, abs=1e-12)
    assert gate_fidelity(SX.astype(complex), np.eye(2, dtype=complex)) == 0.0
    for _ in range(200):
        f = gate_fidelity(_haar(2, rng), _haar(2, rng))
        assert 0.0 <= f <= 1.0


def test_gate_fidelity_phase_invariance_and_symmetry(rng):
    u, v = _haar(4, rng), _haar(4, rng)
    for alpha in rng.uniform(0, 2 * math.pi, size=8):
        assert gate_fidelity(u, np.exp(1j * alpha) * u) == pytest.approx(1.0, abs=1e-12)
    assert gate_fidelity(u, v) == pytest.approx(gate_fidelity(v, u), abs=1e-12)


def test_gate_fidelity_rejects(rng):
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(2, dtype=complex), np.eye(4, dtype=complex))
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(2, dtype=complex) * 2.0, np.eye(2, dtype=complex))


def test_spectator_fidelity_factorized(rng):
    system = SpinSystem(2)
    gate = _haar(2, rng)
    ident = np.kron(gate, np.eye(2))
    assert spectator_fidelity(ident, gate, (0,), system) == pytest.approx(1.0, abs=1e-12)
    rotated = np.kron(gate, _haar(2, rng))
    assert spectator_fidelity(rotated, gate, (0,), system) < 1.0 - 1e-3


def test_rabi_probability_limits(p):
    assert rabi_probability(0.0, 1e8, p.b_ac) == 0.0
    t_pi = math.pi * p.constants.hbar / (2.0 * p.transverse_energy)
    assert rabi_probability(t_pi, 0.0, p.b_ac) == pytest.approx(1.0, abs=1e-12)
    dw = 0.5 * max_detuning(p)
    env = (p.transverse_energy
           / math.hypot(p.transverse_energy, p.constants.hbar * dw)) ** 2
    for t in np.linspace(0.0, 60e-9, 211):
        assert rabi_probability(float(t), dw, p.b_ac) <= env + 1e-12
    with pytest.raises(ValueError):
        rabi_probability(-1e-9, 0.0, p.b_ac)


def test_timescale_table(p):
    local, glob = timescale_table(p)
    assert local.t_x == pytest.approx(1.7862430517984666e-06, rel=1e-12)
    assert local.t2_over_tx == pytest.approx(3.36e4, rel=0.02)
    assert local.t_cnot is None
    assert glob.t_x == pytest.approx(29.770717529974448e-9, rel=1e-12)
    assert abs(glob.t_x - 30e-9) / 30e-9 <= 0.01
    assert glob.t2_over_tx == pytest.approx(2e6, rel=0.02)
    assert abs(glob.t_cnot - 148e-9) / 148e-9 <= 0.01
    # published ratio 6e5 is an order-of-magnitude entry; stay within x2
    assert 0.5 <= glob.t2_over_tcnot / 6e5 <= 2.0


def test_timescale_table_t2_scaling(p):
    rows1 = timescale_table(p, t2=0.060)
    rows2 = timescale_table(p, t2=0.120)
    for r1, r2 in zip(rows1, rows2):
        assert r2.t_x == r1.t_x and r2.t_cnot == r1.t_cnot
        assert r2.t2_over_tx == pytest.approx(2.0 * r1.t2_over_tx, rel=1e-12)


def test_nuclear_flip_x_gate(p):
    sched = synth_x(math.pi, 0, p, SpinSystem(1))
    flip, fdev = frozen_nucleus_check(sched, p)
    assert flip <= 1e-4
    assert fdev <= 1e-3


def test_nuclear_flip_zero_duration(p):
    sched = synth_x(0.0, 0, p, SpinSystem(1))
    assert nuclear_flip_probability(sched, p) == 0.0


def test_nuclear_flip_degrades_at_low_field(p):
    sched_hi = synth_x(math.pi, 0, p, SpinSystem(1))
    flip_hi = nuclear_flip_probability(sched_hi, p)
    p_low = p.replace(b=0.2)
    sched_lo = synth_x(math.pi, 0, p_low, SpinSystem(1))
    flip_lo = nuclear_flip_probability(sched_lo, p_low)
    assert flip_lo > flip_hi


def test_nuclear_flip_rejects_coupled_schedules(p):
    from donorsim.gates import synth_swap

    sched = synth_swap(1e-25, 0, 1, p)
    with pytest.raises(ValueError):
        nuclear_flip_probability(sched, p)


def test_lab_realization(p):
    sched = synth_z(math.pi, 0, p, SpinSystem(1))
    lab = lab_realization(sched, p)
    assert lab.frame == "lab" and lab.carrier is not None
    assert lab_realization(lab, p) is lab


def test_sweep_single_point_bitwise(p):
    rows = sweep({"b_ac": [p.b_ac]}, "spectator_period_ns", p)
    assert rows == [{"b_ac": p.b_ac, "spectator_period_ns": spectator_period(p) * 1e9}]


def test_sweep_spectator_inverse_linear(p):
    values = [0.6e-3, 1.2e-3, 2.4e-3]
    rows = sweep({"b_ac": values}, "spectator_period_ns", p)
    products = [r["b_ac"] * r["spectator_period_ns"] for r in rows]
    assert products[0] == pytest.approx(products[1], rel=1e-12)
    assert products[1] == pytest.approx(products[2], rel=1e-12)


def test_sweep_combined_cnot_monotone_in_d(p):
    ds = [20e-9, 24e-9, 28e-9, 32e-9]
    rows = sweep({"d": ds}, "cnot_combined_ns", p)
    vals = [r["cnot_combined_ns"] for r in rows]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_sweep_grid_order_deterministic(p):
    rows = sweep({"b_ac": [1e-3, 2e-3], "b": [1.0, 2.0]}, "spectator_period_ns", p)
    assert [(r["b_ac"], r["b"]) for r in rows] == [
        (1e-3, 1.0), (1e-3, 2.0), (2e-3, 1.0), (2e-3, 2.0)
    ]


def test_sweep_rejects(p):
    with pytest.raises(ValueError):
        sweep({}, "spectator_period_ns", p)
    with pytest.raises(ValueError):
        sweep({"b_ac": [1e-3]}, "nonsense_metric", p)
    assert "x_gate_ns" in SWEEP_METRICS
