"""Hilbert spaces, spin operators and the donor-spin Hamiltonians in both frames.

Tensor ordering is fixed throughout the package as

    electron_1 (x) [nucleus_1] (x) electron_2 (x) [nucleus_2] (x) ...

Basis convention: electron sites are indexed in the *logical* order
(|0> = spin-down ground state first, |1> = spin-up second), so gate matrices
are the standard ones.  In this representation the electron spin operators are

    sigma_x^e = X,   sigma_y^e = -Y,   sigma_z^e = -Z,

where X, Y, Z are the ordinary Pauli matrices.  A consequence worth noting:
biasing an A-gate lowers the resonance (physical detuning dw <= 0) and tilts
the rotating-frame rotation axis toward +z in matrix space, which is the tilt
the Hadamard and Y constructions need.  Nuclear sites keep the spin order
(up = index 0, down = index 1); the nucleus is initialized up (its ground
state).  All Hamiltonians are dense complex matrices in J; propagators are
exp(-i H t / hbar).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import (
    DeviceParameters,
    InfeasibleDetuningError,
    carrier_frequency,
    max_detuning,
    resonant_frequency,
)

__all__ = [
    "SX",
    "SY",
    "SZ",
    "ID2",
    "SpinSystem",
    "pauli_on",
    "electron_pauli",
    "is_hermitian",
    "assert_hermitian",
    "single_donor_static",
    "single_donor_driven",
    "single_electron_lab",
    "single_electron_rotating",
    "two_electron_rotating",
    "dipole_term",
    "two_electron_rotating_full",
    "electron_pair_dot",
    "hyperfine_dot",
    "frame_rotation",
    "to_rotating_frame",
]

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

# electron spin operators in the logical basis (|0> = spin-down first)
E_SX, E_SY, E_SZ = SX, -SY, -SZ

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class SpinSystem:
    """Hilbert-space descriptor.

    num_donors donors, each contributing one electron spin and, when
    include_nuclei is set, one 31P nuclear spin.
    """

    num_donors: int = 1
    include_nuclei: bool = False
    alignment: str = "z"

    def __post_init__(self):
        if not 1 <= self.num_donors <= 3:
            raise ValueError("num_donors must be 1, 2 or 3")
        if self.include_nuclei and self.num_donors > 2:
            raise ValueError("nuclear spins supported for at most 2 donors")
        if self.alignment not in _AXES:
            raise ValueError("alignment must be one of 'x', 'y', 'z'")

    @property
    def sites_per_donor(self) -> int:
        return 2 if self.include_nuclei else 1

    @property
    def num_sites(self) -> int:
        return self.num_donors * self.sites_per_donor

    @property
    def dim(self) -> int:
        return 2**self.num_sites

    def electron_site(self, donor: int) -> int:
        if not 0 <= donor < self.num_donors:
            raise ValueError(f"donor index {donor} out of range")
        return donor * self.sites_per_donor

    def nucleus_site(self, donor: int) -> int:
        if not self.include_nuclei:
            raise ValueError("system has no nuclear spins")
        if not 0 <= donor < self.num_donors:
            raise ValueError(f"donor index {donor} out of range")
        return donor * self.sites_per_donor + 1

    def basis_labels(self) -> list[str]:
        """Basis-state labels: electrons as 0/1 (logical), nuclei as u/d."""
        labels = [""]
        for site in range(self.num_sites):
            nuclear = self.include_nuclei and site % 2 == 1
            chars = ("u", "d") if nuclear else ("0", "1")
            labels = [lab + c for lab in labels for c in chars]
        return labels


def pauli_on(op: np.ndarray, site: int, num_sites: int) -> np.ndarray:
    """Embed a single-site operator at `site` in the num_sites tensor product."""
    out = np.array([[1.0 + 0.0j]])
    for s in range(num_sites):
        out = np.kron(out, op if s == site else ID2)
    return out


def electron_pauli(system: SpinSystem, donor: int, axis: str) -> np.ndarray:
    """Spin operator sigma_axis of a donor electron, embedded in the full space."""
    op = {"x": E_SX, "y": E_SY, "z": E_SZ}[axis]
    return pauli_on(op, system.electron_site(donor), system.num_sites)


def is_hermitian(h: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(np.abs(h).max(), 1e-300)
    return bool(np.abs(h - h.conj().T).max() <= tol * scale)


def assert_hermitian(h: np.ndarray, tol: float = 1e-12) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("operator must be a square matrix")
    if not is_hermitian(h, tol):
        raise ValueError("operator is not Hermitian within tolerance")


def electron_pair_dot(site_a: int, site_b: int, num_sites: int) -> np.ndarray:
    """sigma_a . sigma_b for two electron sites.

    Both sites carry the flipped (logical) representation, so the matrix is the
    plain XX + YY + ZZ.
    """
    out = np.zeros((2**num_sites, 2**num_sites), dtype=complex)
    for op in (SX, SY, SZ):
        out += pauli_on(op, site_a, num_sites) @ pauli_on(op, site_b, num_sites)
    return out


def hyperfine_dot(e_site: int, n_site: int, num_sites: int) -> np.ndarray:
    """sigma_e . sigma_n between an electron (logical basis) and a nucleus (spin basis)."""
    out = np.zeros((2**num_sites, 2**num_sites), dtype=complex)
    for e_op, n_op in ((E_SX, SX), (E_SY, SY), (E_SZ, SZ)):
        out += pauli_on(e_op, e_site, num_sites) @ pauli_on(n_op, n_site, num_sites)
    return out


# ---------------------------------------------------------------------------
# single-donor Hamiltonians
# ---------------------------------------------------------------------------

def single_donor_static(a: float, p: DeviceParameters) -> np.ndarray:
    """Static donor Hamiltonian on electron (x) nucleus (4-dim), no drive.

    mu_B B sigma_z^e - g_n mu_n B sigma_z^n + A sigma_e . sigma_n
    """
    if a < 0.0:
        raise ValueError("hyperfine energy must be non-negative")
    c = p.constants
    h = c.mu_b * p.b * pauli_on(E_SZ, 0, 2)
    h -= c.g_n * c.mu_n * p.b * pauli_on(SZ, 1, 2)
    h += a * hyperfine_dot(0, 1, 2)
    return h


def _drive_phases(t: float, p: DeviceParameters, rf_phase: float) -> tuple[float, float]:
    theta = carrier_frequency(p) * t + rf_phase
    return np.cos(theta), np.sin(theta)


def _electron_drive(t: float, p: DeviceParameters, rf_phase: float) -> np.ndarray:
    """Co-rotating transverse drive mu_B B_ac (sx cos(th) + sy sin(th)), 2-dim."""
    cth, sth = _drive_phases(t, p, rf_phase)
    return p.transverse_energy * (cth * E_SX + sth * E_SY)


def single_electron_lab(a: float, t: float, p: DeviceParameters, rf_phase: float = 0.0) -> np.ndarray:
    """Driven single-electron lab-frame Hamiltonian (2-dim, time dependent).

    The z coefficient is hbar*(omega(A) - omega_ac/2) on sigma_z^e; mapping by
    the rotating frame exp(i omega_ac t sigma_z^e / 2) then reproduces the
    rotating-frame operator hbar*dw*sigma_z^e + mu_B*B_ac*sigma_x^e exactly (no
    residual scalar offset: every term here is traceless).  At A = A0 the z
    coefficient is mu_B B + A plus the second-order hyperfine shift.
    """
    c = p.constants
    z_coeff = c.hbar * (resonant_frequency(a, p) - 0.5 * carrier_frequency(p))
    return z_coeff * E_SZ + _electron_drive(t, p, rf_phase)


def single_donor_driven(
    a: float,
    t: float,
    p: DeviceParameters,
    rf_phase: float = 0.0,
    include_nuclear_drive: bool = False,
) -> np.ndarray:
    """Full donor Hamiltonian (4-dim): static part plus the RF drive.

    The drive couples to the electron spin only by default; the nuclear Rabi
    rate is ~1e-3 of the electron's, so the optional nuclear term exists only
    for sensitivity studies.
    """
    h = single_donor_static(a, p)
    cth, sth = _drive_phases(t, p, rf_phase)
    h += p.transverse_energy * (cth * pauli_on(E_SX, 0, 2) + sth * pauli_on(E_SY, 0, 2))
    if include_nuclear_drive:
        c = p.constants
        h -= c.g_n * c.mu_n * p.b_ac * (cth * pauli_on(SX, 1, 2) + sth * pauli_on(SY, 1, 2))
    return h


# ---------------------------------------------------------------------------
# rotating-frame Hamiltonians
# ---------------------------------------------------------------------------

def _check_detuning(dw: float, p: DeviceParameters) -> None:
    if abs(dw) > max_detuning(p) * (1.0 + 1e-9):
        raise InfeasibleDetuningError(
            f"detuning {dw:.6e} rad/s exceeds the tunable bound {max_detuning(p):.6e}"
        )


def single_electron_rotating(delta_omega: float, p: DeviceParameters) -> np.ndarray:
    """Rotating-frame single-electron Hamiltonian hbar*dw*sigma_z^e + mu_B*B_ac*sigma_x^e.

    The rotation axis satisfies tan(phi) = hbar*dw / (mu_B B_ac) in spin axes,
    and the eigenvalue gap is 2*Omega with Omega^2 = (mu_B B_ac)^2 + hbar^2 dw^2.
    """
    _check_detuning(delta_omega, p)
    return p.constants.hbar * delta_omega * E_SZ + p.transverse_energy * E_SX


def two_electron_rotating(dw1: float, dw2: float, j: float, p: DeviceParameters) -> np.ndarray:
    """Two driven electrons with exchange (4-dim rotating frame).

    mu_B B_ac (sx1 + sx2) + hbar dw1 sz1 + hbar dw2 sz2 + J sigma1 . sigma2
    """
    if j < 0.0:
        raise ValueError("exchange coupling must be non-negative")
    c = p.constants
    h = p.transverse_energy * (pauli_on(E_SX, 0, 2) + pauli_on(E_SX, 1, 2))
    h += c.hbar * dw1 * pauli_on(E_SZ, 0, 2) + c.hbar * dw2 * pauli_on(E_SZ, 1, 2)
    h += j * electron_pair_dot(0, 1, 2)
    return h


def dipole_term(d_coupling: float, alignment: str, num_sites: int = 2,
                site_a: int = 0, site_b: int = 1) -> np.ndarray:
    """Dipole-dipole operator D (sigma.sigma - 3 (sigma.n)(sigma.n)) for unit axis n.

    For z alignment this reduces to D (sigma.sigma - 3 sz sz), which commutes
    with sz1 + sz2 so the rotating frame stays valid; x/y alignments do not.
    """
    if alignment not in _AXES:
        raise ValueError("alignment must be a unit axis 'x', 'y' or 'z'")
    axis_op = {"x": E_SX, "y": E_SY, "z": E_SZ}[alignment]
    h = electron_pair_dot(site_a, site_b, num_sites)
    h -= 3.0 * pauli_on(axis_op, site_a, num_sites) @ pauli_on(axis_op, site_b, num_sites)
    return d_coupling * h


def two_electron_rotating_full(
    dw1: float, dw2: float, j: float, d_coupling: float, p: DeviceParameters
) -> np.ndarray:
    """Exchange plus dipole two-electron rotating-frame Hamiltonian (z-aligned only)."""
    if p.alignment != "z":
        raise ValueError("rotating frame with dipole coupling requires z alignment")
    return two_electron_rotating(dw1, dw2, j, p) + dipole_term(d_coupling, "z")


# ---------------------------------------------------------------------------
# frame transformation
# ---------------------------------------------------------------------------

def frame_rotation(t: float, p: DeviceParameters, system: SpinSystem) -> np.ndarray:
    """R(t) = prod_e exp(i omega_ac t sigma_z^e / 2): lab -> rotating frame map.

    Acts on electron sites only; nuclear sites are untouched.
    """
    phase = 0.5 * carrier_frequency(p) * t
    # sigma_z^e = -Z in the logical basis, so the matrix is exp(-i phase Z)
    single = np.diag([np.exp(-1j * phase), np.exp(1j * phase)])
    out = np.array([[1.0 + 0.0j]])
    for site in range(system.num_sites):
        nuclear = system.include_nuclei and site % 2 == 1
        out = np.kron(out, ID2 if nuclear else single)
    return out


def to_rotating_frame(
    obj: np.ndarray, t: float, p: DeviceParameters, system: SpinSystem | None = None
) -> np.ndarray:
    """Map a lab-frame state or propagator into the rotating frame.

    States map as R(t) psi.  A propagator U(0 -> t) maps as R(t) U, since
    R(0) is the identity.  The map is unitary; dimensions must match.
    """
    if system is None:
        num = round(np.log2(obj.shape[0]))
        if 2**num != obj.shape[0] or not 1 <= num <= 3:
            raise ValueError("cannot infer spin system; pass one explicitly")
        system = SpinSystem(num_donors=num)
    if obj.shape[0] != system.dim:
        raise ValueError(f"dimension {obj.shape[0]} does not match system dim {system.dim}")
    return frame_rotation(t, p, system) @ obj
