"""Deterministic least-squares fitting of benchmarking decay curves.

The model is P(l) = 1/2 + sign * (1/2) (1 - d_if) (1 - d)^l with sign = +1
for the standard survival decay and sign = -1 for the rising crosstalk
variant.  Points are weighted by their binomial standard errors (with a
floor, so zero-variance points cannot dominate).

The optimizer is intentionally boring and reproducible: a coarse grid over
(d_if, d) picks the basin, then a damped Gauss-Newton iteration with step
halving polishes it to gradient norm < 1e-12.  Both parameters live in the
box [0, 1]; a fit pinned against a box face is flagged rather than hidden.
"""

import math
from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-3
GRAD_TOL = 1e-12
STEP_TOL = 1e-15
MAX_ITER = 200
BOUNDARY_EPS = 1e-9

# Coarse-grid resolution: log-spaced in d (decades below 1), linear in d_if.
GRID_D = np.logspace(-6.0, 0.0, 61)
GRID_DIF = np.linspace(0.0, 1.0, 51)


def fidelity_from_d(d):
    """Square of the average gate fidelity, F^2 = 1 - d/2."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"depolarization must lie in [0, 1], got {d}")
    return 1.0 - 0.5 * d


@dataclass(frozen=True)
class DecayFit:
    """Result of one decay-curve fit."""

    d_if: float
    d: float
    f_squared: float
    sign: int
    rms_residual: float
    stderr_d_if: float
    stderr_d: float
    boundary_flag: bool
    n_points: int

    def to_json_dict(self):
        def _num(x):
            return None if (x is None or not math.isfinite(x)) else float(x)

        return {
            "d_if": _num(self.d_if),
            "d": _num(self.d),
            "F2": _num(self.f_squared),
            "sign": int(self.sign),
            "residual": _num(self.rms_residual),
            "stderr_dif": _num(self.stderr_d_if),
            "stderr_d": _num(self.stderr_d),
            "boundary_flag": bool(self.boundary_flag),
        }


def binomial_sigma(fractions, shots):
    """Per-point binomial standard error of an observed survival fraction.

    The fraction is Laplace-smoothed (one phantom success and one phantom
    failure) so 0- and n-count observations keep an honest nonzero spread
    instead of claiming certainty and capturing the fit; the floor is a
    numerical guard for extreme shot counts.
    """
    fractions = np.asarray(fractions, dtype=float)
    shots = np.asarray(shots, dtype=float)
    smoothed = (fractions * shots + 1.0) / (shots + 2.0)
    raw = np.sqrt(smoothed * (1.0 - smoothed) / shots)
    return np.maximum(raw, SIGMA_FLOOR)


def _model(d_if, d, lengths, sign):
    return 0.5 + sign * 0.5 * (1.0 - d_if) * (1.0 - d) ** lengths


def _jacobian(d_if, d, lengths, sign):
    x = 1.0 - d
    j_dif = -sign * 0.5 * x**lengths
    # x**(l-1) with l >= 1; 0**0 evaluates to 1, which is the correct limit
    j_d = -sign * 0.5 * (1.0 - d_if) * lengths * x ** (lengths - 1.0)
    return np.stack([j_dif, j_d], axis=1)


def _grid_start(lengths, fractions, sigmas, sign):
    powers = (1.0 - GRID_D)[:, None] ** lengths[None, :]  # (nd, npts)
    amp = sign * 0.5 * (1.0 - GRID_DIF)  # (ndif,)
    model = 0.5 + amp[:, None, None] * powers[None, :, :]  # (ndif, nd, npts)
    resid = (fractions[None, None, :] - model) / sigmas[None, None, :]
    sse = np.einsum("ijk,ijk->ij", resid, resid)
    ties = np.argwhere(sse == sse.min())
    # Flat data is fit equally well by amplitude zero (d_if = 1, d anything)
    # and by instant decay (d = 1, d_if anything); prefer the amplitude-zero
    # representation, which leaves F^2 untouched by the unidentifiable d.
    i, j = max(ties, key=lambda t: (GRID_DIF[t[0]], -GRID_D[t[1]]))
    return float(GRID_DIF[i]), float(GRID_D[j])


def fit_survival(lengths, fractions, sigmas=None, sign=1):
    """Fit (d_if, d) to survival fractions versus sequence length.

    ``sigmas`` defaults to equal unit weights (useful for exact synthetic
    curves); pass ``binomial_sigma(...)`` for measured counts.  Raises on
    fewer than two distinct lengths or fractions outside [0, 1].
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    lengths = np.asarray(lengths, dtype=float)
    fractions = np.asarray(fractions, dtype=float)
    if lengths.ndim != 1 or lengths.shape != fractions.shape:
        raise ValueError("lengths and fractions must be equal-length 1-d arrays")
    if np.unique(lengths).size < 2:
        raise ValueError("need at least 2 distinct sequence lengths to fit")
    if np.any(lengths < 1.0):
        raise ValueError("sequence lengths must be >= 1")
    if np.any((fractions < 0.0) | (fractions > 1.0)):
        raise ValueError("survival fractions must lie in [0, 1]")
    if sigmas is None:
        sigmas = np.ones_like(fractions)
    else:
        sigmas = np.asarray(sigmas, dtype=float)
        if sigmas.shape != fractions.shape or np.any(sigmas <= 0.0):
            raise ValueError("sigmas must be positive and match fractions")

    d_if, d = _grid_start(lengths, fractions, sigmas, sign)
    theta = np.array([d_if, d])

    def weighted_residual(t):
        return (fractions - _model(t[0], t[1], lengths, sign)) / sigmas

    r = weighted_residual(theta)
    sse = float(r @ r)
    for _ in range(MAX_ITER):
        jw = _jacobian(theta[0], theta[1], lengths, sign) / sigmas[:, None]
        grad = jw.T @ r
        if float(np.hypot(grad[0], grad[1])) < GRAD_TOL:
            break
        step, *_ = np.linalg.lstsq(jw, r, rcond=None)
        # Backtracking line search, clipped to the parameter box.
        scale = 1.0
        moved = False
        while scale >= STEP_TOL:
            cand = np.clip(theta + scale * step, 0.0, 1.0)
            if np.max(np.abs(cand - theta)) < STEP_TOL:
                break
            rc = weighted_residual(cand)
            sc = float(rc @ rc)
            if sc < sse:
                theta, r, sse = cand, rc, sc
                moved = True
                break
            scale *= 0.5
        if not moved:
            break

    # A parameter that converged within BOUNDARY_EPS of a box face is
    # reported on the face itself; the flag marks such pinned fits.
    theta = np.where(theta < BOUNDARY_EPS, 0.0, theta)
    theta = np.where(theta > 1.0 - BOUNDARY_EPS, 1.0, theta)
    r = weighted_residual(theta)

    jw = _jacobian(theta[0], theta[1], lengths, sign) / sigmas[:, None]
    jtj = jw.T @ jw
    try:
        cov = np.linalg.inv(jtj)
        var = np.diag(cov)
        stderr = np.where(var > 0.0, np.sqrt(np.clip(var, 0.0, None)), np.nan)
    except np.linalg.LinAlgError:
        stderr = np.array([np.nan, np.nan])

    unweighted = fractions - _model(theta[0], theta[1], lengths, sign)
    boundary = bool(
        np.any(theta < BOUNDARY_EPS) or np.any(theta > 1.0 - BOUNDARY_EPS)
    )
    return DecayFit(
        d_if=float(theta[0]),
        d=float(theta[1]),
        f_squared=fidelity_from_d(float(theta[1])),
        sign=sign,
        rms_residual=float(np.sqrt(np.mean(unweighted**2))),
        stderr_d_if=float(stderr[0]),
        stderr_d=float(stderr[1]),
        boundary_flag=boundary,
        n_points=int(lengths.size),
    )
