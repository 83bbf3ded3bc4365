"""Gradient-descent design of the privacy-weighted strategic quantizer.

Each iteration differentiates the encoder's Lagrangian d_e with respect to
every interior boundary, taking the followers' dependence into account:

* a direct (Leibniz) term from the integration limits,
* a chain term through the decoder reconstructions y (which do NOT make the
  encoder's objective stationary, since the decoder optimizes d_d, not d_e),
* no chain term through the eavesdropper estimates: d_e contains the
  eavesdropper's own loss, so its best response is stationary there.  A debug
  helper computes this analytically-zero term explicitly so tests can pin it.

After the step q <- q - eta * grad, each row is projected back onto the
nondecreasing cone by pool-adjacent-violators; coincident boundaries that the
projection produces are legal and encode message skipping.  A backtracking
rule halves eta (down to eta * 2^-20) whenever a step would increase d_e, so
the recorded trajectory is nonincreasing.  The landscape is nonconvex;
multistart adds a fully-revealing Lloyd-Max start to seeded random starts and
keeps the lowest d_e.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .gaussian_model import MASS_FLOOR, SourceSpec, ThetaGrid, _phi
from .metrics import lloyd_max
from .quantizer_core import (
    BestResponses,
    DistortionReport,
    Quantizer,
    _decoder_from_stats,
    _distortions_from_stats,
    _eavesdropper_from_stats,
    pooled_cell_stats,
    quantizer_to_dict,
    validate,
)

logger = logging.getLogger(__name__)

GRADIENT_MODES = ("analytic", "finite-difference")
_BACKTRACK_HALVINGS = 20
_FD_STEP = 1e-5


@dataclass(frozen=True)
class OptimOptions:
    """Step size, stopping rule, restart budget, and gradient flavor."""

    eta: float = 0.05
    eps: float = 1e-9
    max_iters: int = 20_000
    n_restarts: int = 8
    seed: int = 0
    gradient_mode: str = "analytic"

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_iters < 1 or self.n_restarts < 1:
            raise ValueError("max_iters and n_restarts must be >= 1")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"gradient_mode must be one of {GRADIENT_MODES}")


@dataclass(frozen=True)
class DesignResult:
    """One descent outcome: the quantizer, responses, distortions, and diagnostics."""

    quantizer: Quantizer
    responses: BestResponses
    report: DistortionReport
    iterations: int
    converged: bool
    trajectory: np.ndarray | None = None
    restart_index: int | None = None


def project_monotone(row: np.ndarray) -> np.ndarray:
    """Euclidean projection of a boundary row onto nondecreasing order.

    Pool-adjacent-violators on the interior entries; the -inf/+inf edges are
    preserved.  Idempotent.
    """
    row = np.asarray(row, dtype=float)
    out = row.copy()
    out[1:-1] = _pav(row[1:-1])
    return out


def _pav(v: np.ndarray) -> np.ndarray:
    if v.size <= 1:
        return v.copy()
    sums: list[float] = []
    counts: list[int] = []
    for x in v:
        s, c = float(x), 1
        # merge while the previous block mean exceeds the growing block's mean
        while sums and sums[-1] * c > s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)
    return np.repeat([s / c for s, c in zip(sums, counts)], counts)


def _row_density(source: SourceSpec, grid: ThetaGrid, points: np.ndarray) -> np.ndarray:
    """Conditional density f(points[j, c] | theta_j), vectorized over rows."""
    mu_c = source.rho * (source.sigma_x / source.sigma_theta) * grid.nodes
    sigma_c = source.sigma_x * math.sqrt(max(1.0 - source.rho**2, 0.0))
    z = (points - mu_c[:, None]) / sigma_c
    return _phi(z) / sigma_c


def _analytic_gradient(
    q: Quantizer,
    source: SourceSpec,
    grid: ThetaGrid,
    lam: float,
    stats: dict[str, np.ndarray],
    y: np.ndarray,
    theta_hat: np.ndarray,
) -> np.ndarray:
    b = q.interior()  # (J, M-1)
    if b.size == 0:
        return np.zeros_like(b)
    theta = grid.nodes[:, None]
    w = grid.weights[:, None]
    f = _row_density(source, grid, b)

    y_left, y_right = y[:-1][None, :], y[1:][None, :]
    th_left, th_right = theta_hat[:-1][None, :], theta_hat[1:][None, :]
    direct = ((b + theta - y_left) ** 2 - lam * (theta - th_left) ** 2) - (
        (b + theta - y_right) ** 2 - lam * (theta - th_right) ** 2
    )

    n, a, t = stats["N"], stats["A"], stats["T"]
    with np.errstate(invalid="ignore", divide="ignore"):
        centroid_gap = np.where(
            n >= MASS_FLOOR, (a + t) / np.where(n > 0, n, 1.0) - y, 0.0
        )  # pooled mean of (x + theta) minus y, per cell
    gap_left, gap_right = centroid_gap[:-1][None, :], centroid_gap[1:][None, :]
    chain = 2.0 * (gap_right * (b - y_right) - gap_left * (b - y_left))

    grad = w * f * (direct + chain)
    # collapsed directions carry subgradient 0
    coincident = (q.boundaries[:, 1:-1] == q.boundaries[:, :-2]) | (
        q.boundaries[:, 1:-1] == q.boundaries[:, 2:]
    )
    grad[coincident] = 0.0
    return grad


def eavesdropper_chain_term(
    q: Quantizer, source: SourceSpec, grid: ThetaGrid, lam: float
) -> np.ndarray:
    """The gradient contribution through theta_hat, computed explicitly.

    At the eavesdropper's best response this is identically zero (its loss
    enters d_e with its own minimizer); returned so tests can assert it.
    """
    stats = pooled_cell_stats(q, source, grid)
    theta_hat = _eavesdropper_from_stats(stats["N"], stats["T"])
    b = q.interior()
    if b.size == 0:
        return np.zeros_like(b)
    theta = grid.nodes[:, None]
    w = grid.weights[:, None]
    f = _row_density(source, grid, b)
    n, t = stats["N"], stats["T"]
    # d d_e / d theta_hat_k = 2 lam (T_k - theta_hat_k N_k)
    dde = 2.0 * lam * (t - theta_hat * n)
    with np.errstate(invalid="ignore", divide="ignore"):
        safe_n = np.where(n >= MASS_FLOOR, n, np.inf)
    left = dde[:-1][None, :] * (theta - theta_hat[:-1][None, :]) / safe_n[:-1][None, :]
    right = dde[1:][None, :] * (theta - theta_hat[1:][None, :]) / safe_n[1:][None, :]
    return w * f * (left - right)


def _eval_full(
    q: Quantizer, source: SourceSpec, grid: ThetaGrid, lam: float
) -> tuple[dict[str, np.ndarray], BestResponses, DistortionReport]:
    stats = pooled_cell_stats(q, source, grid)
    y = _decoder_from_stats(q, stats["N"], stats["A"])
    theta_hat = _eavesdropper_from_stats(stats["N"], stats["T"])
    br = BestResponses(y=y, theta_hat=theta_hat, cell_mass=stats["N"])
    return stats, br, _distortions_from_stats(stats, y, theta_hat, lam)


def _fd_gradient(
    q: Quantizer, source: SourceSpec, grid: ThetaGrid, lam: float, step: float = _FD_STEP
) -> np.ndarray:
    """Central finite differences of d_e, best responses recomputed per probe.

    Probes shrink near coincident boundaries to stay inside the monotone cone;
    fully collapsed directions get 0, matching the analytic convention.
    """
    b = q.boundaries
    grad = np.zeros((q.n_theta, q.M - 1))
    for j in range(q.n_theta):
        for c in range(1, q.M):
            gap_lo = b[j, c] - b[j, c - 1]
            gap_hi = b[j, c + 1] - b[j, c]
            h = min(step, gap_lo / 2.0, gap_hi / 2.0)
            if h <= 0.0:
                continue
            grad[j, c - 1] = (
                _probe_d_e(q, source, grid, lam, j, c, h)
                - _probe_d_e(q, source, grid, lam, j, c, -h)
            ) / (2.0 * h)
    return grad


def _probe_d_e(
    q: Quantizer, source: SourceSpec, grid: ThetaGrid, lam: float, j: int, c: int, h: float
) -> float:
    perturbed = np.array(q.boundaries)
    perturbed[j, c] += h
    _, _, report = _eval_full(Quantizer(M=q.M, boundaries=perturbed), source, grid, lam)
    return report.d_e


def boundary_gradient(
    q: Quantizer,
    source: SourceSpec,
    grid: ThetaGrid,
    lam: float,
    mode: str = "analytic",
) -> np.ndarray:
    """Total derivative of d_e w.r.t. each interior boundary, shape (n_theta, M-1)."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if mode == "analytic":
        stats, br, _ = _eval_full(q, source, grid, lam)
        return _analytic_gradient(q, source, grid, lam, stats, br.y, br.theta_hat)
    if mode == "finite-difference":
        return _fd_gradient(q, source, grid, lam)
    raise ValueError(f"unknown gradient mode {mode!r}")


def random_monotone_quantizer(
    source: SourceSpec, grid: ThetaGrid, M: int, rng: np.random.Generator
) -> Quantizer:
    """Random initialization: per-row sorted standard-normal draws scaled by sigma_x."""
    interior = np.sort(rng.standard_normal((grid.n_nodes, M - 1)), axis=1) * source.sigma_x
    return _with_edges(interior, grid.n_nodes)


def _with_edges(interior: np.ndarray, n_rows: int) -> Quantizer:
    edges_lo = np.full((n_rows, 1), -np.inf)
    edges_hi = np.full((n_rows, 1), np.inf)
    return Quantizer(M=interior.shape[1] + 1, boundaries=np.hstack([edges_lo, interior, edges_hi]))


def design(
    source: SourceSpec,
    grid: ThetaGrid,
    M: int,
    lam: float,
    opts: OptimOptions = OptimOptions(),
    init: Quantizer | None = None,
) -> DesignResult:
    """Single gradient-descent run from init (or a seeded random start).

    Stops when the per-iteration improvement drops below opts.eps or after
    opts.max_iters accepted steps; the converged flag reflects the eps rule.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if init is None:
        init = random_monotone_quantizer(source, grid, M, np.random.default_rng(opts.seed))
    if init.M != M or init.n_theta != grid.n_nodes:
        raise ValueError("init quantizer shape does not match (grid, M)")
    report_problems = validate(init)
    if not report_problems.ok:
        raise ValueError(f"invalid init quantizer: {report_problems.violations}")

    q = init
    stats, br, rep = _eval_full(q, source, grid, lam)
    trajectory = [rep.d_e]
    if M == 1:
        return DesignResult(q, br, rep, iterations=0, converged=True, trajectory=np.array(trajectory))

    eta_min = opts.eta * 2.0**-_BACKTRACK_HALVINGS
    eta_accepted = opts.eta
    iterations = 0
    converged = False
    for _ in range(opts.max_iters):
        if opts.gradient_mode == "analytic":
            grad = _analytic_gradient(q, source, grid, lam, stats, br.y, br.theta_hat)
        else:
            grad = _fd_gradient(q, source, grid, lam)

        eta_try = min(opts.eta, 2.0 * eta_accepted)
        accepted = False
        while True:
            interior = q.interior() - eta_try * grad
            if interior.shape[1] > 1 and np.any(np.diff(interior, axis=1) < 0):
                interior = np.vstack([_pav(row) for row in interior])
            cand = _with_edges(interior, grid.n_nodes)
            cand_stats, cand_br, cand_rep = _eval_full(cand, source, grid, lam)
            if cand_rep.d_e <= rep.d_e:
                accepted = True
                break
            if eta_try <= eta_min:
                break
            eta_try = max(eta_try / 2.0, eta_min)

        if not accepted:
            converged = True  # no descent direction left at the step floor
            break
        delta = rep.d_e - cand_rep.d_e
        q, stats, br, rep = cand, cand_stats, cand_br, cand_rep
        trajectory.append(rep.d_e)
        iterations += 1
        eta_accepted = eta_try
        if delta < opts.eps:
            converged = True
            break

    if logger.isEnabledFor(logging.DEBUG):
        grad = _analytic_gradient(q, source, grid, lam, stats, br.y, br.theta_hat)
        step = np.vstack([_pav(row) for row in q.interior() - opts.eta * grad])
        proj_norm = float(np.linalg.norm(q.interior() - step)) / opts.eta
        logger.debug(
            "design M=%d lam=%g: iters=%d converged=%s d_e=%.9g projected_grad_norm=%.3g",
            M, lam, iterations, converged, rep.d_e, proj_norm,
        )
    return DesignResult(
        q, br, rep, iterations=iterations, converged=converged, trajectory=np.array(trajectory)
    )


def multistart(
    source: SourceSpec,
    grid: ThetaGrid,
    M: int,
    lam: float,
    opts: OptimOptions = OptimOptions(),
) -> DesignResult:
    """Best of n_restarts seeded random starts plus one Lloyd-Max start.

    Deterministic given opts.seed; ties break toward the lowest restart index.
    """
    rng = np.random.default_rng(opts.seed)
    inits = [random_monotone_quantizer(source, grid, M, rng) for _ in range(opts.n_restarts)]
    if M == 1:
        inits = inits[:1]
    else:
        lm = lloyd_max(source, M)
        inits.append(Quantizer(M=M, boundaries=np.tile(lm.boundaries, (grid.n_nodes, 1))))
    best: DesignResult | None = None
    for idx, init in enumerate(inits):
        result = design(source, grid, M, lam, opts, init=init)
        if best is None or result.report.d_e < best.report.d_e:
            best = replace(result, restart_index=idx)
    assert best is not None
    return best


def design_result_to_dict(result: DesignResult, grid: ThetaGrid) -> dict:
    """JSON-ready dict: the quantizer schema extended with responses and outcomes."""
    data = quantizer_to_dict(result.quantizer, grid)
    data.update(
        {
            "y": [float(v) for v in result.responses.y],
            "theta_hat": [float(v) for v in result.responses.theta_hat],
            "d_e": result.report.d_e,
            "fidelity": result.report.fidelity,
            "d_d": result.report.d_d,
            "d_theta": result.report.d_theta,
            "iterations": result.iterations,
            "converged": result.converged,
        }
    )
    return data
