"""Independent verification paths for the quantizer pipeline.

Two oracles, deliberately unsophisticated:

* brute_force_design enumerates every assignment of interior boundaries to a
  fixed candidate grid (per theta row, nondecreasing tuples), evaluates the
  encoder Lagrangian at exact best responses, and returns the global grid
  optimum.  Feasible only for tiny instances (M=2, a few theta nodes); the
  gradient designer must land at or below this value up to grid resolution.

* monte_carlo_distortions samples the discretized source, pushes samples
  through the quantizer and both estimators, and averages squared errors.
  Theta is drawn from the grid atoms, not the continuum, so that quadrature
  and sampling share the same model and any discrepancy isolates an
  integration bug rather than a discretization gap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gaussian_model import MASS_FLOOR, SourceSpec, ThetaGrid, interval_moments
from .optimizer import DesignResult
from .quantizer_core import BestResponses, DistortionReport, Quantizer, evaluate

_MAX_ENUMERATION = 100_000_000
_CHUNK = 131_072


@dataclass(frozen=True)
class OracleGrid:
    """Candidate boundary positions for exhaustive search."""

    candidates: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.candidates, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("candidates must be a nonempty 1-D array")
        if np.any(np.diff(c) <= 0):
            raise ValueError("candidates must be strictly increasing")
        c.flags.writeable = False
        object.__setattr__(self, "candidates", c)


@dataclass(frozen=True)
class MonteCarloReport:
    """Sampled distortions with per-quantity standard errors."""

    report: DistortionReport
    se_fidelity: float
    se_d_d: float
    se_d_theta: float
    se_d_e: float
    n_samples: int


def make_oracle_grid(source: SourceSpec, n_points: int = 41, span_sigmas: float = 3.0) -> OracleGrid:
    """Equispaced candidates on [-span, +span] sigma_x (default 41 on +-3 sigma)."""
    half = span_sigmas * source.sigma_x
    return OracleGrid(candidates=np.linspace(-half, half, n_points))


def brute_force_design(
    source: SourceSpec,
    grid: ThetaGrid,
    M: int,
    lam: float,
    ogrid: OracleGrid,
) -> DesignResult:
    """Global optimum over all grid-valued boundary matrices.

    Ties break toward the lexicographically smallest boundary tuple (rows
    scanned in order, candidates ascending).  Raises if the enumeration count
    exceeds the feasibility cap, reporting the count.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    n_rows = grid.n_nodes
    cands = ogrid.candidates
    if M == 1:
        choice_idx = np.zeros((1, 0), dtype=int)
    else:
        choice_idx = np.array(
            list(itertools.combinations_with_replacement(range(cands.size), M - 1)), dtype=int
        )
    n_choices = choice_idx.shape[0]
    total = int(n_choices) ** n_rows  # Python ints: no overflow before the cap check
    if total > _MAX_ENUMERATION:
        raise ValueError(
            f"enumeration of {n_choices}^{n_rows} = {total} boundary assignments "
            f"exceeds the {_MAX_ENUMERATION} cap"
        )

    # per-row (n_choices, M) weighted moment tables under the conditional law
    rows_bounds = np.hstack(
        [np.full((n_choices, 1), -np.inf), cands[choice_idx], np.full((n_choices, 1), np.inf)]
    )
    sigma_c = source.sigma_x * math.sqrt(max(1.0 - source.rho**2, 0.0))
    mu_all = source.rho * (source.sigma_x / source.sigma_theta) * grid.nodes
    tables = []
    for j in range(n_rows):
        mass, first, second = interval_moments(float(mu_all[j]), sigma_c, rows_bounds)
        w, th = grid.weights[j], grid.nodes[j]
        tables.append(
            (w * mass, w * first, w * second, w * th * mass, w * th * first, w * th**2 * mass)
        )

    best_d_e = math.inf
    best_index = -1
    radix = [n_choices**p for p in range(n_rows - 1, -1, -1)]
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        lin = np.arange(lo, hi, dtype=np.int64)
        n = np.zeros((hi - lo, M))
        a = np.zeros_like(n)
        s = np.zeros_like(n)
        t = np.zeros_like(n)
        b = np.zeros_like(n)
        u = np.zeros_like(n)
        for j in range(n_rows):
            k = (lin // radix[j]) % n_choices
            wm, wf, ws, wtm, wtf, wt2m = tables[j]
            n += wm[k]
            a += wf[k]
            s += ws[k]
            t += wtm[k]
            b += wtf[k]
            u += wt2m[k]
        safe = np.where(n >= MASS_FLOOR, n, 1.0)
        y = np.where(n >= MASS_FLOOR, a / safe, 0.0)
        th_hat = np.where(n >= MASS_FLOOR, t / safe, 0.0)
        fidelity = np.sum(s + 2.0 * b + u - 2.0 * y * (a + t) + y**2 * n, axis=1)
        d_theta = np.sum(u - 2.0 * th_hat * t + th_hat**2 * n, axis=1)
        d_e = fidelity - lam * d_theta
        i = int(np.argmin(d_e))
        if d_e[i] < best_d_e:  # strict: first occurrence wins, i.e. lexicographic
            best_d_e = float(d_e[i])
            best_index = lo + i

    ks = [(best_index // radix[j]) % n_choices for j in range(n_rows)]
    boundaries = np.vstack([rows_bounds[k] for k in ks])
    q = Quantizer(M=M, boundaries=boundaries)
    br, report = evaluate(q, source, grid, lam)
    return DesignResult(
        quantizer=q,
        responses=br,
        report=report,
        iterations=total,
        converged=True,
        trajectory=None,
    )


def monte_carlo_distortions(
    q: Quantizer,
    br: BestResponses,
    source: SourceSpec,
    grid: ThetaGrid,
    lam: float,
    n_samples: int,
    seed: int,
) -> MonteCarloReport:
    """Sampled distortions of (q, br); reproducible bit-for-bit given seed."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    rng = np.random.default_rng(seed)
    j_idx = rng.choice(grid.n_nodes, size=n_samples, p=grid.weights)
    theta = grid.nodes[j_idx]
    mu_c = source.rho * (source.sigma_x / source.sigma_theta) * theta
    sigma_c = source.sigma_x * math.sqrt(max(1.0 - source.rho**2, 0.0))
    x = mu_c + sigma_c * rng.standard_normal(n_samples)

    interior = q.boundaries[:, 1:-1]
    msg = (x[:, None] > interior[j_idx]).sum(axis=1) if q.M > 1 else np.zeros(n_samples, dtype=int)
    y = br.y[msg]
    th_hat = br.theta_hat[msg]

    fid_s = (x + theta - y) ** 2
    dd_s = (x - y) ** 2
    dth_s = (theta - th_hat) ** 2
    de_s = fid_s - lam * dth_s

    def _mean_se(v: np.ndarray) -> tuple[float, float]:
        m = float(v.mean())
        se = float(v.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
        return m, se

    fid, se_fid = _mean_se(fid_s)
    dd, se_dd = _mean_se(dd_s)
    dth, se_dth = _mean_se(dth_s)
    de, se_de = _mean_se(de_s)
    return MonteCarloReport(
        report=DistortionReport(d_e=de, fidelity=fid, d_d=dd, d_theta=dth),
        se_fidelity=se_fid,
        se_d_d=se_dd,
        se_d_theta=se_dth,
        se_d_e=se_de,
        n_samples=n_samples,
    )
