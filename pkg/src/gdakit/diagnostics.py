"""Convergence diagnostics turning the library's guarantees into checks.

Central quantities, for a problem with constants (l1, mu, sigma), kappa =
l1/mu, and inner maximum phi(x) = max_y F(x, y):

  efficiency metric   h(x,y) = (1/4)|grad phi(x)|^2
                             + (1/20) kappa^2 |grad_y F(x,y)|^2
                             + (11/40)|grad_x F(x,y)|^2
  merit function      V(x,y) = phi(x) + C (phi(x) - F(x,y)),  C = 1/10

One randomized alternating step from (x, y) moves to (x - alpha*grad_x F, y)
with probability p and to (x, y + eta*grad_y F) with probability 1-p. Its
exact one-step conditional expectation over the branch coin is a two-point
average, which converts in-expectation statements into deterministic,
per-point assertions:

  contraction_check   E|next - u*|^2 <= rho |u - u*|^2 on strongly
                      convex-concave problems, rho = 1 - 2 p mu alpha
                      + alpha^2 (1-p) l1^2 (valid at p = 1/2 for any
                      admissible alpha; see the check's docstring)
  descent_check       V - E[V_next] >= p * alpha * h at sigma = 0 under the
                      step constraints from gdakit.schedules
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    CapabilityError,
    ConstraintError,
    GdakitError,
    InsufficientDataError,
    ParameterError,
)
from .problems import JointPoint, Problem, require_phi
from .schedules import step_constraints

LYAPUNOV_C = 0.1
H_WEIGHTS = (0.25, 1.0 / 20.0, 11.0 / 40.0)


class CertificateViolation(GdakitError):
    """A per-point theorem check failed; message carries both sides."""


@dataclass(frozen=True)
class TraceRecord:
    """One logged optimizer step; optional fields stay None when disabled."""

    k: int
    branch: str  # 'x', 'y', or 'both'
    alpha: float
    eta: float
    p: float
    grad_x_norm: float | None = None
    grad_y_norm: float | None = None
    h: float | None = None
    v: float | None = None
    dist: float | None = None
    loss: float | None = None


@dataclass(frozen=True)
class PhiEstimate:
    phi: float
    y_hat: np.ndarray
    converged: bool
    iters: int
    grad_sq: float


def phi_inner(
    problem: Problem,
    x: np.ndarray,
    y0: np.ndarray,
    tol: float,
    max_iters: int = 10_000,
) -> PhiEstimate:
    """Estimate phi(x) by exact gradient ascent in y with step 1/l1.

    Stops once |grad_y F|^2 / (2 mu) <= tol, which certifies
    max_y F - F(x, y_hat) <= tol under gradient domination. converged=False
    flags budget exhaustion (the estimate is then a lower bound of
    uncertified accuracy).
    """
    require_phi(problem)
    if tol <= 0:
        raise ParameterError(f"phi_inner: tol must be > 0, got {tol}")
    c = problem.constants
    step = 1.0 / c.l1
    y = np.asarray(y0, dtype=np.float64).copy()
    gap_bound = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        gy = problem.exact_grad(JointPoint(x, y)).gy
        gsq = float(gy @ gy)
        gap_bound = gsq / (2.0 * c.mu)
        if gap_bound <= tol:
            # it - 1 ascent steps were taken before this certificate
            return PhiEstimate(
                phi=problem.value(JointPoint(x, y)),
                y_hat=y,
                converged=True,
                iters=it - 1,
                grad_sq=gsq,
            )
        y = y + step * gy
    gy = problem.exact_grad(JointPoint(x, y)).gy
    return PhiEstimate(
        phi=problem.value(JointPoint(x, y)),
        y_hat=y,
        converged=False,
        iters=max_iters,
        grad_sq=float(gy @ gy),
    )


def _phi_and_maximizer(
    problem: Problem,
    point: JointPoint,
    inner_tol: float | None,
    inner_budget: int,
) -> tuple[float, np.ndarray, bool]:
    """(phi(x), y*(x), certified) via closed form or inner ascent."""
    require_phi(problem)
    if problem.closed_phi is not None:
        phi, y_star = problem.closed_phi(point.x)
        return phi, y_star, True
    if inner_tol is None:
        # relative default keeps the certificate meaningful across scales
        inner_tol = 1e-8 * max(1.0, abs(problem.value(point)))
    est = phi_inner(problem, point.x, point.y, inner_tol, inner_budget)
    return est.phi, est.y_hat, est.converged


def h_metric(
    problem: Problem,
    point: JointPoint,
    *,
    inner_tol: float | None = None,
    inner_budget: int = 10_000,
) -> float:
    """Efficiency metric h(x, y); see module docstring for the weights.

    grad phi(x) is evaluated as grad_x F(x, y*(x)) at the closed-form or
    ascent-certified inner maximizer.
    """
    problem.check_point(point)
    _, y_star, _ = _phi_and_maximizer(problem, point, inner_tol, inner_budget)
    g_at_star = problem.exact_grad(JointPoint(point.x, y_star))
    g_here = problem.exact_grad(point)
    w_phi, w_gy, w_gx = H_WEIGHTS
    kappa2 = problem.constants.kappa ** 2
    return float(
        w_phi * (g_at_star.gx @ g_at_star.gx)
        + w_gy * kappa2 * (g_here.gy @ g_here.gy)
        + w_gx * (g_here.gx @ g_here.gx)
    )


def lyapunov(
    problem: Problem,
    point: JointPoint,
    c: float = LYAPUNOV_C,
    *,
    inner_tol: float | None = None,
    inner_budget: int = 10_000,
) -> float:
    """Merit value V(x,y) = phi(x) + c*(phi(x) - F(x,y))."""
    if c < 0:
        raise ParameterError(f"lyapunov: c must be >= 0, got {c}")
    problem.check_point(point)
    phi, _, _ = _phi_and_maximizer(problem, point, inner_tol, inner_budget)
    return float(phi + c * (phi - problem.value(point)))


class ContractionReport(NamedTuple):
    measured_ratio: float
    rho: float
    # same formula with the p dropped from the linear term; kept for
    # side-by-side reporting because that variant circulates as well
    rho_uncorrected: float


def _two_branch_ratio(problem: Problem, point: JointPoint, alpha: float, p: float):
    u_star = problem.nash_point.joined()
    u = point.joined()
    base = float((u - u_star) @ (u - u_star))
    if base == 0.0:
        raise ParameterError("contraction_check: point coincides with the Nash point")
    g = problem.exact_grad(point)
    x_next = np.concatenate([point.x - alpha * g.gx, point.y])
    y_next = np.concatenate([point.x, point.y + alpha * g.gy])
    ex = float((x_next - u_star) @ (x_next - u_star))
    ey = float((y_next - u_star) @ (y_next - u_star))
    return (p * ex + (1.0 - p) * ey) / base


def contraction_check(
    problem: Problem, point: JointPoint, alpha: float, p: float
) -> ContractionReport:
    """Exact two-branch contraction test at one point of an SCSC problem.

    measured = [p |(x - a gx, y) - u*|^2 + (1-p) |(x, y + a gy) - u*|^2]
               / |(x,y) - u*|^2 must not exceed rho = 1 - 2 p mu alpha
               + alpha^2 (1-p) l1^2 (tolerance 1e-12).

    Preconditions: the problem exposes its Nash point and alpha <
    2 p mu / ((1-p) l1^2). The rho formula is provable pointwise at p = 1/2
    (and for uncoupled problems at any p <= 1/2); away from that regime
    coupled instances admit genuine violations at small alpha, which this
    check will faithfully report as CertificateViolation.
    """
    if problem.nash_point is None:
        raise CapabilityError(f"{problem.name}: no Nash point exposed")
    if not (0 < p <= 1):
        raise ParameterError(f"contraction_check: p must lie in (0, 1], got {p}")
    c = problem.constants
    if p < 1.0:
        alpha_bound = 2.0 * p * c.mu / ((1.0 - p) * c.l1**2)
        if not (0 < alpha < alpha_bound):
            raise ConstraintError(
                f"contraction_check: alpha={alpha} outside (0, "
                f"2*p*mu/((1-p)*l1^2) = {alpha_bound})"
            )
    elif alpha <= 0:
        raise ParameterError("contraction_check: alpha must be > 0")
    problem.check_point(point)
    measured = _two_branch_ratio(problem, point, alpha, p)
    rho = 1.0 - 2.0 * p * c.mu * alpha + alpha**2 * (1.0 - p) * c.l1**2
    rho_unc = 1.0 - 2.0 * c.mu * alpha + alpha**2 * (1.0 - p) * c.l1**2
    if measured > rho + 1e-12:
        raise CertificateViolation(
            f"contraction_check: measured ratio {measured!r} exceeds "
            f"rho {rho!r} + 1e-12 (alpha={alpha}, p={p})"
        )
    return ContractionReport(measured, rho, rho_unc)


@dataclass(frozen=True)
class SweepReport:
    count: int
    worst_margin: float  # max over points of measured - rho (or -residual)
    worst_index: int


def contraction_sweep(
    problem: Problem, points: Sequence[JointPoint], alpha: float, p: float
) -> SweepReport:
    """Non-raising bulk version of contraction_check; returns the worst
    measured-minus-rho margin over the points (negative means all pass)."""
    c = problem.constants
    rho = 1.0 - 2.0 * p * c.mu * alpha + alpha**2 * (1.0 - p) * c.l1**2
    worst, worst_i = -math.inf, -1
    for i, pt in enumerate(points):
        m = _two_branch_ratio(problem, pt, alpha, p) - rho
        if m > worst:
            worst, worst_i = m, i
    return SweepReport(count=len(points), worst_margin=worst, worst_index=worst_i)


@dataclass(frozen=True)
class DescentReport:
    lhs: float  # V(x,y) - E[V after one randomized step]
    rhs: float  # p * alpha * h(x,y)
    residual: float  # lhs - rhs; >= 0 up to roundoff when constraints hold


def descent_check(
    problem: Problem,
    point: JointPoint,
    alpha: float,
    eta: float,
    p: float,
    c: float = LYAPUNOV_C,
) -> DescentReport:
    """One-step merit decrease against p*alpha*h at a single point.

    Exact gradients, no noise term: the expected next merit value is the
    exact two-point average over the branch coin. Requires closed-form phi
    and refuses step sizes that violate the feasibility constraints (the
    inequality is only a theorem inside them).
    """
    problem.check_point(point)
    if problem.closed_phi is None:
        raise CapabilityError(
            f"{problem.name}: descent_check needs a closed-form inner maximum"
        )
    sc = step_constraints(problem.constants, p)
    bad = sc.check(alpha, eta)
    if bad:
        raise ConstraintError("descent_check: " + "; ".join(bad))

    g = problem.exact_grad(point)
    v_here = lyapunov(problem, point, c)
    v_x = lyapunov(problem, JointPoint(point.x - alpha * g.gx, point.y), c)
    v_y = lyapunov(problem, JointPoint(point.x, point.y + eta * g.gy), c)
    lhs = v_here - (p * v_x + (1.0 - p) * v_y)
    rhs = p * alpha * h_metric(problem, point)
    return DescentReport(lhs=lhs, rhs=rhs, residual=lhs - rhs)


def fd_gradient_check(
    problem: Problem,
    point: JointPoint,
    h: float = 1e-5,
    *,
    coords_x: Sequence[int] | None = None,
    coords_y: Sequence[int] | None = None,
) -> float:
    """Max relative error of exact_grad vs central differences of value().

    Relative error uses denominator max(|g_i|, 1e-8) per coordinate. Pass
    coordinate subsets to keep wide MLP parameter spaces cheap.
    """
    if h <= 0:
        raise ParameterError(f"fd_gradient_check: h must be > 0, got {h}")
    problem.check_point(point)
    g = problem.exact_grad(point)
    cx = range(problem.m) if coords_x is None else coords_x
    cy = range(problem.n) if coords_y is None else coords_y
    worst = 0.0
    for i in cx:
        xp, xm = point.x.copy(), point.x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (
            problem.value(JointPoint(xp, point.y))
            - problem.value(JointPoint(xm, point.y))
        ) / (2 * h)
        worst = max(worst, abs(fd - g.gx[i]) / max(abs(g.gx[i]), 1e-8))
    for i in cy:
        yp, ym = point.y.copy(), point.y.copy()
        yp[i] += h
        ym[i] -= h
        fd = (
            problem.value(JointPoint(point.x, yp))
            - problem.value(JointPoint(point.x, ym))
        ) / (2 * h)
        worst = max(worst, abs(fd - g.gy[i]) / max(abs(g.gy[i]), 1e-8))
    return worst


@dataclass(frozen=True)
class RateSummary:
    exponent: float
    n_points: int
    final_min_h: float
    meets_rate_target: bool | None  # exponent <= -0.8; only judged at sigma=0


def rate_summary(trace: Sequence[TraceRecord], sigma: float | None = None) -> RateSummary:
    """Decay exponent of the running-min of h against the iteration index.

    Least-squares slope of log(running min h) vs log(k) over logged records
    with k >= 1 and h present. An exact-gradient run of the randomized
    alternating method should show exponent <= -0.8 (the 1/k envelope with
    fitting headroom); that judgment is only meaningful without gradient
    noise, so meets_rate_target is None unless sigma == 0 is passed.
    """
    ks, hs = [], []
    for rec in trace:
        if rec.h is not None and rec.k >= 1:
            ks.append(rec.k)
            hs.append(rec.h)
    if len(hs) < 10:
        raise InsufficientDataError(
            f"rate_summary: need >= 10 logged h values with k >= 1, got {len(hs)}"
        )
    run_min = np.minimum.accumulate(np.asarray(hs, dtype=np.float64))
    run_min = np.maximum(run_min, 1e-300)  # guard log of an exact zero
    slope = float(np.polyfit(np.log(ks), np.log(run_min), 1)[0])
    meets = (slope <= -0.8) if sigma == 0 else None
    return RateSummary(
        exponent=slope,
        n_points=len(hs),
        final_min_h=float(run_min[-1]),
        meets_rate_target=meets,
    )
