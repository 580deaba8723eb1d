"""Hot numeric kernels: midpoint-rule time-stepping for lab-frame propagation.

Two implementations are provided for each kernel: a numba @njit streaming loop
(default) and a vectorized pure-numpy path that builds per-step propagators in
chunks and combines them by pairwise tree reduction.  Selection is by the
environment variable DONORSIM_BACKEND: "numba" (default when importable) or
"numpy".  `benchmarks/bench_kernels.py` compares the two.

Kernel conventions (natural units, rates in rad/s):

    su2:    H(t)/hbar = az*Z + ax*(X cos(w t + phi0) + Y sin(w t + phi0))
    donor4: H(t) = H_static + drive(t), stepped by a second-order Strang split
            around the midpoint-time drive, drive(t) the tensor product of
            closed-form 2x2 transverse rotations on electron and nucleus.

Every step propagator is the exact exponential of a Hermitian generator, so
products are unitary up to roundoff; callers re-unitarize segment results with
`nearest_unitary`.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "su2_lab_product",
    "donor4_strang_product",
    "nearest_unitary",
]

_requested = os.environ.get("DONORSIM_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"DONORSIM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

HAVE_NUMBA = False
if _requested != "numpy":
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Polar projection onto the unitary group (removes accumulated roundoff)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


# ---------------------------------------------------------------------------
# SU(2) midpoint stream
# ---------------------------------------------------------------------------

def _su2_stream_py(az, ax, omega, phi0, t0, dt, n):
    out = np.eye(2, dtype=np.complex128)
    w = np.sqrt(az * az + ax * ax)
    if w == 0.0 or n == 0:
        return out
    alpha = w * dt
    ca = np.cos(alpha)
    sa = np.sin(alpha)
    nz = az / w
    nt = ax / w
    u00 = 1.0 + 0.0j
    u01 = 0.0 + 0.0j
    u10 = 0.0 + 0.0j
    u11 = 1.0 + 0.0j
    for k in range(n):
        th = omega * (t0 + (k + 0.5) * dt) + phi0
        nx = nt * np.cos(th)
        ny = nt * np.sin(th)
        m00 = ca - 1j * sa * nz
        m11 = ca + 1j * sa * nz
        m01 = -1j * sa * (nx - 1j * ny)
        m10 = -1j * sa * (nx + 1j * ny)
        v00 = m00 * u00 + m01 * u10
        v01 = m00 * u01 + m01 * u11
        v10 = m10 * u00 + m11 * u10
        v11 = m10 * u01 + m11 * u11
        u00, u01, u10, u11 = v00, v01, v10, v11
    out[0, 0] = u00
    out[0, 1] = u01
    out[1, 0] = u10
    out[1, 1] = u11
    return out


def _su2_step_matrices(az, ax, omega, phi0, t0, dt, k0, k1):
    """Vectorized midpoint-step propagators for steps k0..k1-1, shape (k1-k0, 2, 2)."""
    w = np.hypot(az, ax)
    alpha = w * dt
    ca, sa = np.cos(alpha), np.sin(alpha)
    nz, nt = az / w, ax / w
    th = omega * (t0 + (np.arange(k0, k1) + 0.5) * dt) + phi0
    nx = nt * np.cos(th)
    ny = nt * np.sin(th)
    m = np.empty((k1 - k0, 2, 2), dtype=complex)
    m[:, 0, 0] = ca - 1j * sa * nz
    m[:, 1, 1] = ca + 1j * sa * nz
    m[:, 0, 1] = -1j * sa * (nx - 1j * ny)
    m[:, 1, 0] = -1j * sa * (nx + 1j * ny)
    return m


def _tree_product(m: np.ndarray) -> np.ndarray:
    """Ordered product m[-1] @ ... @ m[0] by pairwise reduction (log-depth roundoff)."""
    while m.shape[0] > 1:
        if m.shape[0] % 2:
            tail = m[-1]
            m = np.matmul(m[1:-1:2], m[0:-1:2])
            m[-1] = tail @ m[-1]
        else:
            m = np.matmul(m[1::2], m[0::2])
    return m[0]


def _su2_tree_np(az, ax, omega, phi0, t0, dt, n, chunk=1 << 16):
    if n == 0 or (az == 0.0 and ax == 0.0):
        return np.eye(2, dtype=complex)
    u = np.eye(2, dtype=complex)
    for k0 in range(0, n, chunk):
        k1 = min(k0 + chunk, n)
        u = _tree_product(_su2_step_matrices(az, ax, omega, phi0, t0, dt, k0, k1)) @ u
    return u


# ---------------------------------------------------------------------------
# 4-dim donor Strang stream
# ---------------------------------------------------------------------------

def _rot2_entries(angle, th):
    """Entries of exp(-i angle (X cos th + Y sin th)); angle may be negative."""
    ca = np.cos(abs(angle))
    sa = np.sin(abs(angle))
    s = 0.0 if angle == 0.0 else (1.0 if angle > 0.0 else -1.0)
    off = -1j * sa * s
    return ca, off * (np.cos(th) - 1j * np.sin(th)), off * (np.cos(th) + 1j * np.sin(th))


def _donor4_strang_py(e_half, gx_e, phase_sign_e, gx_n, omega, chi, t0, dt, n):
    u = np.eye(4, dtype=np.complex128)
    de = np.zeros((2, 2), dtype=np.complex128)
    dn = np.zeros((2, 2), dtype=np.complex128)
    for k in range(n):
        th = omega * (t0 + (k + 0.5) * dt) + chi
        ca, o01, o10 = _rot2_entries(gx_e * dt, phase_sign_e * th)
        de[0, 0] = ca
        de[1, 1] = ca
        de[0, 1] = o01
        de[1, 0] = o10
        ca, o01, o10 = _rot2_entries(gx_n * dt, th)
        dn[0, 0] = ca
        dn[1, 1] = ca
        dn[0, 1] = o01
        dn[1, 0] = o10
        mid = np.kron(de, dn)
        u = (e_half @ (mid @ e_half)) @ u
    return u


def _donor4_tree_np(e_half, gx_e, phase_sign_e, gx_n, omega, chi, t0, dt, n, chunk=1 << 13):
    if n == 0:
        return np.eye(4, dtype=complex)
    u = np.eye(4, dtype=complex)
    for k0 in range(0, n, chunk):
        k1 = min(k0 + chunk, n)
        th = omega * (t0 + (np.arange(k0, k1) + 0.5) * dt) + chi
        factors = []
        for gx, sgn in ((gx_e, phase_sign_e), (gx_n, 1.0)):
            m = np.zeros((k1 - k0, 2, 2), dtype=complex)
            a = abs(gx) * dt
            ca, sa = np.cos(a), np.sin(a)
            m[:, 0, 0] = ca
            m[:, 1, 1] = ca
            if gx != 0.0:
                s = 1.0 if gx > 0.0 else -1.0
                phase = sgn * th
                m[:, 0, 1] = -1j * sa * s * (np.cos(phase) - 1j * np.sin(phase))
                m[:, 1, 0] = -1j * sa * s * (np.cos(phase) + 1j * np.sin(phase))
            factors.append(m)
        de, dn = factors
        mid = np.einsum("kab,kcd->kacbd", de, dn).reshape(k1 - k0, 4, 4)
        steps = np.matmul(e_half, np.matmul(mid, e_half))
        u = _tree_product(steps) @ u
    return u


# ---------------------------------------------------------------------------
# numba versions
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _su2_stream_nb = njit(cache=True, fastmath=False)(_su2_stream_py)

    @njit(cache=True, fastmath=False)
    def _donor4_strang_nb(e_half, gx_e, phase_sign_e, gx_n, omega, chi, t0, dt, n):
        u = np.eye(4, dtype=np.complex128)
        mid = np.zeros((4, 4), dtype=np.complex128)
        ae = abs(gx_e) * dt
        an = abs(gx_n) * dt
        ca_e = np.cos(ae)
        sa_e = np.sin(ae) * (1.0 if gx_e >= 0.0 else -1.0)
        ca_n = np.cos(an)
        sa_n = np.sin(an) * (1.0 if gx_n >= 0.0 else -1.0)
        for k in range(n):
            th = omega * (t0 + (k + 0.5) * dt) + chi
            the = phase_sign_e * th
            e01 = -1j * sa_e * (np.cos(the) - 1j * np.sin(the))
            e10 = -1j * sa_e * (np.cos(the) + 1j * np.sin(the))
            if gx_n != 0.0:
                n01 = -1j * sa_n * (np.cos(th) - 1j * np.sin(th))
                n10 = -1j * sa_n * (np.cos(th) + 1j * np.sin(th))
            else:
                n01 = 0.0j
                n10 = 0.0j
            # kron(de, dn) with de = [[ca_e, e01], [e10, ca_e]], dn likewise
            mid[0, 0] = ca_e * ca_n
            mid[0, 1] = ca_e * n01
            mid[1, 0] = ca_e * n10
            mid[1, 1] = ca_e * ca_n
            mid[0, 2] = e01 * ca_n
            mid[0, 3] = e01 * n01
            mid[1, 2] = e01 * n10
            mid[1, 3] = e01 * ca_n
            mid[2, 0] = e10 * ca_n
            mid[2, 1] = e10 * n01
            mid[3, 0] = e10 * n10
            mid[3, 1] = e10 * ca_n
            mid[2, 2] = ca_e * ca_n
            mid[2, 3] = ca_e * n01
            mid[3, 2] = ca_e * n10
            mid[3, 3] = ca_e * ca_n
            u = (e_half @ (mid @ e_half)) @ u
        return u


def su2_lab_product(az, ax, omega, phi0, t0, dt, n):
    """Ordered product of n midpoint-step SU(2) propagators (see module docstring)."""
    if BACKEND == "numba":
        return _su2_stream_nb(float(az), float(ax), float(omega), float(phi0),
                              float(t0), float(dt), int(n))
    return _su2_tree_np(float(az), float(ax), float(omega), float(phi0),
                        float(t0), float(dt), int(n))


def donor4_strang_product(e_half, gx_e, phase_sign_e, gx_n, omega, chi, t0, dt, n):
    """Second-order split-step product for the driven 4-dim donor Hamiltonian.

    e_half is the precomputed half-step static propagator
    exp(-i H_static dt / (2 hbar)).
    """
    args = (np.ascontiguousarray(e_half, dtype=np.complex128), float(gx_e),
            float(phase_sign_e), float(gx_n), float(omega), float(chi),
            float(t0), float(dt), int(n))
    if BACKEND == "numba":
        return _donor4_strang_nb(*args)
    return _donor4_tree_np(*args)
