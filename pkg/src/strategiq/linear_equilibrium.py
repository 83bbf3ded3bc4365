"""Rate-unconstrained equilibrium of the privacy-weighted signaling game.

With linear strategies Z = X + alpha*theta, Y = kappa*Z, theta_hat = nu*Z,
the followers' best responses are the scalar MMSE coefficients

    kappa = E[XZ]/E[Z^2],    nu = E[theta Z]/E[Z^2],

and the leader minimizes

    J(alpha) = E[(X + theta - kappa Z)^2] - lam * E[(theta - nu Z)^2].

J reduces to constant + P(alpha)/v(alpha) with
P = c_x^2 - 2 c_x c_xs + lam c_s^2, and its stationary points solve

    r(rho + r) alpha^2 + (1 + lam r^2) alpha + (lam rho r - 1) = 0.

The closed-form root is not trusted blindly: the minimizing branch is
confirmed numerically against the other root and a fan of probe points on
every call (the second-order argument is easy to get wrong by a sign).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_model import SourceSpec
from .quantizer_core import DistortionReport

_PROBE_OFFSETS = np.concatenate([-np.logspace(-3, 1, 10)[::-1], np.logspace(-3, 1, 10)])


@dataclass(frozen=True)
class MomentBundle:
    """Second moments of Z = X + alpha*theta against X, theta, and X + theta."""

    v: float
    c_x: float
    c_s: float
    c_xs: float


@dataclass(frozen=True)
class LinearEquilibrium:
    """Equilibrium coefficients of the unconstrained-rate game at one lam."""

    alpha: float
    kappa: float
    nu: float
    lam: float


def moment_bundle(source: SourceSpec, alpha: float) -> MomentBundle:
    """All second moments of Z = X + alpha*theta needed by the linear stage."""
    sx, st, rho = source.sigma_x, source.sigma_theta, source.rho
    v = sx**2 + 2.0 * alpha * rho * sx * st + alpha**2 * st**2
    c_x = sx**2 + alpha * rho * sx * st
    c_s = rho * sx * st + alpha * st**2
    return MomentBundle(v=v, c_x=c_x, c_s=c_s, c_xs=c_x + c_s)


def best_response_coeffs(source: SourceSpec, alpha: float) -> tuple[float, float]:
    """MMSE scalings (kappa, nu) of the decoder and eavesdropper against alpha."""
    mb = moment_bundle(source, alpha)
    if mb.v <= 0:
        raise ValueError("E[Z^2] must be positive; degenerate encoder configuration")
    return mb.c_x / mb.v, mb.c_s / mb.v


def encoder_objective(source: SourceSpec, alpha: float, lam: float) -> float:
    """Leader objective J(alpha) at the followers' best responses.

    Computed two ways (direct moment expansion and constant + P/v) that must
    agree to 1e-10; disagreement indicates a moment-algebra bug.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    mb = moment_bundle(source, alpha)
    if mb.v <= 0:
        raise ValueError("E[Z^2] must be positive; degenerate encoder configuration")
    sx, st, rho = source.sigma_x, source.sigma_theta, source.rho
    kappa = mb.c_x / mb.v
    nu = mb.c_s / mb.v
    e_xt2 = sx**2 + 2.0 * rho * sx * st + st**2
    fidelity = e_xt2 - 2.0 * kappa * mb.c_xs + kappa**2 * mb.v
    d_theta = st**2 - 2.0 * nu * mb.c_s + nu**2 * mb.v
    direct = fidelity - lam * d_theta

    constant = sx**2 + (1.0 - lam) * st**2 + 2.0 * rho * sx * st
    p = mb.c_x**2 - 2.0 * mb.c_x * mb.c_xs + lam * mb.c_s**2
    ratio_form = constant + p / mb.v
    # agreement is relative to the largest intermediate term: both routes
    # cancel O(lam)-sized quantities at extreme privacy weights
    scale = max(1.0, abs(fidelity), lam * abs(d_theta), abs(constant), abs(p / mb.v))
    assert abs(direct - ratio_form) <= 1e-10 * scale, (direct, ratio_form)
    return direct


def optimal_alpha(source: SourceSpec, lam: float) -> float:
    """Leader-optimal encoder coefficient alpha*.

    Solves the stationarity quadratic and verifies numerically that the
    returned root beats the other root and +-10 probe points around it.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    r, rho = source.r, source.rho
    a2 = r * (rho + r)
    a1 = 1.0 + lam * r**2
    a0 = lam * rho * r - 1.0
    if a2 == 0.0:
        alpha = -a0 / a1
        other = None
    else:
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc < 0:
            raise AssertionError(
                f"negative discriminant {disc}; violates lam >= 0, |rho| <= 1 structure"
            )
        sq = math.sqrt(disc)
        # conjugate form of (-a1 + sq)/(2 a2): immune to cancellation at large lam
        alpha = -2.0 * a0 / (a1 + sq)
        other = (-a1 - sq) / (2.0 * a2)

    j_star = encoder_objective(source, alpha, lam)
    slack = 1e-9 * max(1.0, abs(j_star))
    if other is not None and moment_bundle(source, other).v > 1e-12:
        assert j_star <= encoder_objective(source, other, lam) + slack, "wrong quadratic root"
    scale = max(1.0, abs(alpha))
    for delta in _PROBE_OFFSETS:
        probe = alpha + delta * scale
        if moment_bundle(source, probe).v <= 1e-12:
            continue
        assert j_star <= encoder_objective(source, probe, lam) + slack, (
            f"alpha*={alpha} is not a minimizer at probe offset {delta}"
        )
    return alpha


def solve_equilibrium(source: SourceSpec, lam: float) -> LinearEquilibrium:
    """Full equilibrium triple (alpha*, kappa, nu) at privacy weight lam."""
    alpha = optimal_alpha(source, lam)
    kappa, nu = best_response_coeffs(source, alpha)
    return LinearEquilibrium(alpha=alpha, kappa=kappa, nu=nu, lam=lam)


def linear_distortions(source: SourceSpec, alpha: float, lam: float) -> DistortionReport:
    """All distortions of the linear strategy profile at (alpha, MMSE responses)."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    mb = moment_bundle(source, alpha)
    if mb.v <= 0:
        raise ValueError("E[Z^2] must be positive; degenerate encoder configuration")
    sx, st, rho = source.sigma_x, source.sigma_theta, source.rho
    kappa = mb.c_x / mb.v
    nu = mb.c_s / mb.v
    e_xt2 = sx**2 + 2.0 * rho * sx * st + st**2
    fidelity = e_xt2 - 2.0 * kappa * mb.c_xs + kappa**2 * mb.v
    d_d = sx**2 - 2.0 * kappa * mb.c_x + kappa**2 * mb.v
    d_theta = st**2 - 2.0 * nu * mb.c_s + nu**2 * mb.v
    return DistortionReport(
        d_e=fidelity - lam * d_theta, fidelity=fidelity, d_d=d_d, d_theta=d_theta
    )
