"""Exact 2x2 algebra for a microwave-driven qubit.

States, rotations, detuned pulses, global-phase bookkeeping, survival
probabilities, Bloch-sphere-averaged fidelities, and the two standard
incoherent channels (depolarizing and phase damping).  Everything here is
plain numpy: unitaries are (2, 2) complex128 arrays, pure states are (2,)
vectors, density matrices are (2, 2) Hermitian arrays.
"""

from dataclasses import dataclass

import numpy as np

UNITARY_ATOL = 1e-12
PHASE_TOL = 1e-9

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class PulseSpec:
    """A resonant-frame microwave pulse: drive phase and rotation area.

    ``phi_mw`` is the microwave phase that sets the in-plane rotation axis
    (0 for x, pi/2 for y), normalized into [0, 2*pi).  ``area`` is the
    nominal rotation angle theta_R = Omega * t and must be nonnegative;
    -pi/2 rotations are expressed as +3*pi/2 pulses.
    """

    phi_mw: float
    area: float

    def __post_init__(self):
        if not np.isfinite(self.area) or self.area < 0.0:
            raise ValueError(f"pulse area must be finite and >= 0, got {self.area}")
        if not np.isfinite(self.phi_mw):
            raise ValueError(f"pulse phase must be finite, got {self.phi_mw}")
        object.__setattr__(self, "phi_mw", float(self.phi_mw) % (2.0 * np.pi))
        object.__setattr__(self, "area", float(self.area))


def validate_unitary(u, atol=UNITARY_ATOL):
    """Raise ValueError unless ``u`` is a 2x2 matrix with u^dag u = I."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - ID2))
    if err > atol:
        raise ValueError(f"matrix is not unitary (deviation {err:.3e} > {atol:.1e})")
    return u


def make_state(theta, phi):
    """Bloch-angle pure state cos(theta/2)|0> + e^(i phi) sin(theta/2)|1>.

    Requires theta in [0, pi] and phi in [0, 2*pi).
    """
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"polar angle must lie in [0, pi], got {theta}")
    if not 0.0 <= phi < 2.0 * np.pi:
        raise ValueError(f"azimuthal angle must lie in [0, 2*pi), got {phi}")
    return np.array(
        [np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=complex
    )


def rotation(axis, theta):
    """exp(-i theta sigma_axis / 2) for axis in {'x','y','z'}."""
    try:
        pauli = _PAULIS[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None
    half = 0.5 * theta
    return np.cos(half) * ID2 - 1j * np.sin(half) * pauli


def detuned_pulse(phi_mw, theta_r, ratio):
    """Unitary of a square drive pulse with detuning-to-Rabi ratio ``ratio``.

    The resonant pulse would rotate by ``theta_r`` about the equatorial axis
    at angle ``phi_mw``.  A detuning delta = ratio * Omega tilts the rotation
    axis out of the equator to (cos(phi), sin(phi), ratio)/sqrt(1 + ratio^2)
    and stretches the rotation angle to theta_r * sqrt(1 + ratio^2).  The
    result is exactly special-unitary (det = +1).
    """
    rr = 1.0 + ratio * ratio
    root = np.sqrt(rr)
    half = 0.5 * theta_r * root
    c = np.cos(half)
    s = np.sin(half) / root
    nx = np.cos(phi_mw)
    ny = np.sin(phi_mw)
    return np.array(
        [
            [c - 1j * s * ratio, s * (-ny - 1j * nx)],
            [s * (ny - 1j * nx), c + 1j * s * ratio],
        ],
        dtype=complex,
    )


def transfer_probability(theta_r, ratio):
    """Generalized Rabi flopping probability |<0|U|1>|^2 for a detuned pulse.

    Equals sin^2(theta_r sqrt(1 + ratio^2) / 2) / (1 + ratio^2).
    """
    rr = 1.0 + ratio * ratio
    s = np.sin(0.5 * theta_r * np.sqrt(rr))
    return s * s / rr


def compose(ops):
    """Product of a pulse train; the FIRST list element is applied first.

    Equivalent to the matrix product ops[-1] @ ... @ ops[0].
    """
    ops = list(ops)
    if not ops:
        raise ValueError("cannot compose an empty sequence")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.asarray(op, dtype=complex) @ out
    return out


def phase_distance(u, v):
    """max-norm distance between ``u`` and ``v`` after the best global phase.

    The phase is read off the entry of largest magnitude in ``v``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    vk = v.flat[k]
    if abs(vk) < UNITARY_ATOL:
        return float(np.max(np.abs(u - v)))
    chi = u.flat[k] / vk
    mag = abs(chi)
    phase = chi / mag if mag > 0.0 else 1.0
    return float(np.max(np.abs(u - phase * v)))


def phase_equivalent(u, v, tol=PHASE_TOL):
    """True when the two unitaries agree up to a global phase within ``tol``."""
    return phase_distance(u, v) <= tol


def canonicalize(u):
    """Strip the global phase so the first nonzero top-row entry is real positive.

    "Nonzero" means magnitude above 1e-12; exact unitaries always have one in
    the top row.
    """
    u = np.asarray(u, dtype=complex)
    for entry in (u[0, 0], u[0, 1]):
        mag = abs(entry)
        if mag > 1e-12:
            return u * (mag / entry)
    raise ValueError("matrix has no usable top-row entry to fix the phase")


def survival_fidelity(psi, u):
    """|<psi|U|psi>|^2, the probability that ``u`` returns ``psi`` to itself."""
    psi = np.asarray(psi, dtype=complex)
    amp = np.vdot(psi, np.asarray(u, dtype=complex) @ psi)
    return float(min(1.0, (amp * amp.conjugate()).real))


def _bloch_average_quadrature(u, n):
    # Gauss-Legendre in cos(theta), uniform rectangle rule in phi (the
    # integrand is periodic in phi, so the rectangle rule converges fast).
    mu, w = np.polynomial.legendre.leggauss(n)
    phis = 2.0 * np.pi * np.arange(n) / n
    c = np.sqrt((1.0 + mu) / 2.0)[:, None]  # cos(theta/2)
    s = np.sqrt((1.0 - mu) / 2.0)[:, None]  # sin(theta/2)
    ph = np.exp(1j * phis)[None, :]
    amp = (
        u[0, 0] * c * c
        + (u[0, 1] * ph + u[1, 0] / ph) * c * s
        + u[1, 1] * s * s
    )
    f_mu = np.mean(np.abs(amp) ** 2, axis=1)
    return 0.5 * float(np.dot(w, f_mu))


def bloch_avg_fidelity(u, method="closed_form"):
    """Survival fidelity of ``u`` averaged uniformly over the Bloch sphere.

    ``closed_form`` evaluates 1/3 + |Tr U|^2 / 6, which is exact for any
    unitary.  ``quadrature`` integrates |<psi|U|psi>|^2 numerically, starting
    from a 64-point grid and doubling until two successive estimates agree to
    1e-10; it exists to cross-check the closed form, not to replace it.
    """
    u = np.asarray(u, dtype=complex)
    if method == "closed_form":
        tr = u[0, 0] + u[1, 1]
        f = 1.0 / 3.0 + (tr * tr.conjugate()).real / 6.0
        return float(min(1.0, max(0.0, f)))
    if method == "quadrature":
        n = 64
        prev = _bloch_average_quadrature(u, n)
        while n < 2048:
            n *= 2
            cur = _bloch_average_quadrature(u, n)
            if abs(cur - prev) < 1e-10:
                return float(min(1.0, max(0.0, cur)))
            prev = cur
        return float(min(1.0, max(0.0, prev)))
    raise ValueError(f"unknown method {method!r}")


def pure_density(psi):
    """Rank-one density matrix |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def evolve(rho, u):
    """Unitary channel U rho U^dag."""
    u = np.asarray(u, dtype=complex)
    return u @ np.asarray(rho, dtype=complex) @ u.conj().T


def depolarize(rho, p):
    """Depolarizing channel: keep rho with weight 1-p, mix in I/2 with weight p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    rho = np.asarray(rho, dtype=complex)
    return (1.0 - p) * rho + p * 0.5 * np.trace(rho).real * ID2


def phase_damp(rho, contrast):
    """Phase-damping channel: scale off-diagonal coherences by ``contrast``."""
    if not 0.0 <= contrast <= 1.0:
        raise ValueError(f"contrast must lie in [0, 1], got {contrast}")
    rho = np.asarray(rho, dtype=complex).copy()
    rho[0, 1] *= contrast
    rho[1, 0] *= contrast
    return rho
