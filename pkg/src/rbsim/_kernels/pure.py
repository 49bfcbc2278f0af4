"""Vectorized numpy implementation of the per-shot density-matrix kernel.

Mirrors the compiled kernel in ``_core.pyx`` operation for operation: shots
are evolved as stacked 2x2 density matrices (rho00, rho01, rho11), one pulse
at a time.  Each pulse may be followed by a z-phase kick (the dephasing
channel, precomputed per shot and pulse by the caller); each gate may be
followed by amplitude damping and a depolarizing mix.  Detection consumes
one projective uniform and one classification uniform per shot.
"""

import numpy as np

KERNEL_NAME = "python"


def run_shots(
    cphi,
    sphi,
    theta,
    gate_start,
    gate_damp,
    r_shot,
    timing,
    phase,
    use_phase,
    depol,
    prep_flip,
    u_proj,
    u_class,
    p_bright0,
    p_bright1,
):
    """Simulate all shots of one sequence; return the bright-detection count.

    ``phase[s, p]`` is the z-rotation angle applied to the coherence after
    pulse ``p`` of shot ``s`` (ignored unless ``use_phase``).  ``r_shot`` is
    the per-shot axis-tilt ratio folded into every pulse.  ``depol`` acts
    after every gate except the last (the recovery transfer).
    """
    n_shots = r_shot.shape[0]
    n_gates = gate_start.shape[0] - 1

    rho00 = np.where(prep_flip.astype(bool), 1.0, 0.0)
    rho11 = 1.0 - rho00
    rho01 = np.zeros(n_shots, dtype=complex)

    rr = 1.0 + r_shot * r_shot
    root = np.sqrt(rr)

    for g in range(n_gates):
        for p in range(gate_start[g], gate_start[g + 1]):
            area = theta[p] * (1.0 + timing[:, p])
            half = 0.5 * area * root
            c = np.cos(half)
            s = np.sin(half) / root
            ua = c - 1j * (s * r_shot)
            ub = -s * sphi[p] - 1j * (s * cphi[p])
            uc = s * sphi[p] - 1j * (s * cphi[p])
            ud = np.conj(ua)

            n00 = (
                (ua.real**2 + ua.imag**2) * rho00
                + (ub.real**2 + ub.imag**2) * rho11
                + 2.0 * (ua * rho01 * np.conj(ub)).real
            )
            n11 = (
                (uc.real**2 + uc.imag**2) * rho00
                + (ud.real**2 + ud.imag**2) * rho11
                + 2.0 * (uc * rho01 * np.conj(ud)).real
            )
            n01 = (
                ua * np.conj(uc) * rho00
                + ua * np.conj(ud) * rho01
                + ub * np.conj(uc) * np.conj(rho01)
                + ub * np.conj(ud) * rho11
            )
            rho00, rho01, rho11 = n00, n01, n11

            if use_phase:
                ang = phase[:, p]
                rho01 = rho01 * (np.cos(ang) - 1j * np.sin(ang))

        if gate_damp[g] > 0.0:
            gam = gate_damp[g]
            rho00 = rho00 + gam * rho11
            rho11 = (1.0 - gam) * rho11
            rho01 = rho01 * np.sqrt(1.0 - gam)
        # The final gate is the recovery transfer; its imperfection belongs
        # to the intercept of the decay model, so it is not depolarized.
        if depol > 0.0 and g < n_gates - 1:
            rho00 = (1.0 - depol) * rho00 + 0.5 * depol
            rho11 = (1.0 - depol) * rho11 + 0.5 * depol
            rho01 = rho01 * (1.0 - depol)

    p0 = np.clip(rho00, 0.0, 1.0)
    outcome_zero = u_proj < p0
    p_bright = np.where(outcome_zero, p_bright0, p_bright1)
    return int(np.count_nonzero(u_class < p_bright))
