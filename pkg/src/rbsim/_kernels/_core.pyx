# cython: language_level=3
"""Compiled per-shot density-matrix kernel.

Scalar twin of ``pure.run_shots``: identical inputs, identical draw
consumption, same arithmetic per pulse, so the two kernels agree to
floating-point roundoff.  The shot loop runs without the GIL so thread
pools can spread sequences over cores.
"""

from libc.math cimport cos, sin, sqrt

import numpy as np

KERNEL_NAME = "cython"


def run_shots(
    double[::1] cphi,
    double[::1] sphi,
    double[::1] theta,
    long long[::1] gate_start,
    double[::1] gate_damp,
    double[::1] r_shot,
    double[:, ::1] timing,
    double[:, ::1] phase,
    int use_phase,
    double depol,
    unsigned char[::1] prep_flip,
    double[::1] u_proj,
    double[::1] u_class,
    double p_bright0,
    double p_bright1,
):
    """Simulate all shots of one sequence; return the bright-detection count."""
    cdef Py_ssize_t n_shots = r_shot.shape[0]
    cdef Py_ssize_t n_gates = gate_start.shape[0] - 1
    cdef Py_ssize_t s, g, p
    cdef double r, rr, root, area, half, c, sn
    cdef double rho00, rho11, n00, n11, p0, ang, gam, pb
    cdef double complex rho01, n01, ua, ub, uc, ud, ph
    cdef long survivors = 0

    with nogil:
        for s in range(n_shots):
            if prep_flip[s]:
                rho00 = 1.0
                rho11 = 0.0
            else:
                rho00 = 0.0
                rho11 = 1.0
            rho01 = 0.0

            r = r_shot[s]
            rr = 1.0 + r * r
            root = sqrt(rr)

            for g in range(n_gates):
                for p in range(gate_start[g], gate_start[g + 1]):
                    area = theta[p] * (1.0 + timing[s, p])
                    half = 0.5 * area * root
                    c = cos(half)
                    sn = sin(half) / root
                    ua = c - 1j * (sn * r)
                    ub = -sn * sphi[p] - 1j * (sn * cphi[p])
                    uc = sn * sphi[p] - 1j * (sn * cphi[p])
                    ud = c + 1j * (sn * r)

                    n00 = (
                        (ua.real * ua.real + ua.imag * ua.imag) * rho00
                        + (ub.real * ub.real + ub.imag * ub.imag) * rho11
                        + 2.0 * (ua * rho01 * ub.conjugate()).real
                    )
                    n11 = (
                        (uc.real * uc.real + uc.imag * uc.imag) * rho00
                        + (ud.real * ud.real + ud.imag * ud.imag) * rho11
                        + 2.0 * (uc * rho01 * ud.conjugate()).real
                    )
                    n01 = (
                        ua * uc.conjugate() * rho00
                        + ua * ud.conjugate() * rho01
                        + ub * uc.conjugate() * rho01.conjugate()
                        + ub * ud.conjugate() * rho11
                    )
                    rho00 = n00
                    rho01 = n01
                    rho11 = n11

                    if use_phase:
                        ang = phase[s, p]
                        ph = cos(ang) - 1j * sin(ang)
                        rho01 = rho01 * ph

                if gate_damp[g] > 0.0:
                    gam = gate_damp[g]
                    rho00 = rho00 + gam * rho11
                    rho11 = (1.0 - gam) * rho11
                    rho01 = rho01 * sqrt(1.0 - gam)
                # Recovery transfer (last gate) is not depolarized; its
                # error sits in the intercept of the decay model.
                if depol > 0.0 and g < n_gates - 1:
                    rho00 = (1.0 - depol) * rho00 + 0.5 * depol
                    rho11 = (1.0 - depol) * rho11 + 0.5 * depol
                    rho01 = rho01 * (1.0 - depol)

            p0 = rho00
            if p0 < 0.0:
                p0 = 0.0
            elif p0 > 1.0:
                p0 = 1.0
            if u_proj[s] < p0:
                pb = p_bright0
            else:
                pb = p_bright1
            if u_class[s] < pb:
                survivors += 1

    return int(survivors)
