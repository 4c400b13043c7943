"""Stochastic alternating first-order methods for minimax problems.

All methods sample unbiased gradients and alternate ascent in y with descent
in x; they differ in how much inner ascent buys each descent step:

  sgda_step    one ascent step, then one descent step at the updated y
               (two fresh samples per step; a strict mode reuses the first
               sample at the new point instead)
  sgdmax_step  ascend y until the inner gap is certified below delta, then
               one stochastic descent step
  esgda_step   m chained stochastic ascent steps, then one descent step
  rsgda_step   one sample and one coin: descent step with probability p,
               ascent step otherwise (single gradient evaluation per step)

Counters track gradient evaluations so runs can be compared at equal oracle
cost: sgda costs 2 per step, esgda m+1, rsgda 1, sgdmax inner+1.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .core import ParameterError, RngStream
from .diagnostics import TraceRecord, h_metric, lyapunov
from .problems import JointPoint, Problem
from .schedules import StepPlan, require_feasible


@dataclass(frozen=True)
class Sgda:
    """Unless strict_sample_reuse is set, the descent step draws a fresh
    sample at (x_k, y_{k+1}); strict mode reuses the ascent sample there."""

    strict_sample_reuse: bool = False
    tag: str = "sgda"


@dataclass(frozen=True)
class SgdMax:
    delta: float = 1e-6
    inner_max_iters: int = 1000
    tag: str = "sgdmax"

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError(f"SgdMax: delta must be > 0, got {self.delta}")
        if self.inner_max_iters < 1:
            raise ParameterError("SgdMax: inner_max_iters must be >= 1")


@dataclass(frozen=True)
class Esgda:
    m: int = 1
    tag: str = "esgda"

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"Esgda: m must be >= 1, got {self.m}")


@dataclass(frozen=True)
class Rsgda:
    tag: str = "rsgda"


OptKind = Union[Sgda, SgdMax, Esgda, Rsgda]


@dataclass(frozen=True)
class OptState:
    """Iterate plus stream and oracle-cost counters; steps return new states."""

    point: JointPoint
    rng: RngStream
    k: int = 0
    x_steps: int = 0
    y_steps: int = 0
    grad_evals: int = 0
    last_branch: str = ""
    warnings: tuple[str, ...] = ()


def init_state(point: JointPoint, rng: RngStream) -> OptState:
    return OptState(point=point, rng=rng)


def sgda_step(
    problem: Problem,
    state: OptState,
    alpha: float,
    eta: float,
    *,
    strict_sample_reuse: bool = False,
) -> OptState:
    """Ascent at (x, y), then descent at (x, y_new). Two gradient evaluations."""
    pt = problem.check_point(state.point)
    if strict_sample_reuse:
        z = problem.draw_sample(state.rng)
        gy = problem.grad_with_sample(pt, z).gy
        y_new = pt.y + eta * gy
        gx = problem.grad_with_sample(JointPoint(pt.x, y_new), z).gx
    else:
        gy = problem.stoch_grad(pt, state.rng).gy
        y_new = pt.y + eta * gy
        gx = problem.stoch_grad(JointPoint(pt.x, y_new), state.rng).gx
    x_new = pt.x - alpha * gx
    return replace(
        state,
        point=JointPoint(x_new, y_new),
        k=state.k + 1,
        x_steps=state.x_steps + 1,
        y_steps=state.y_steps + 1,
        grad_evals=state.grad_evals + 2,
        last_branch="both",
    )


def sgdmax_step(
    problem: Problem,
    state: OptState,
    alpha: float,
    delta: float,
    inner_max_iters: int = 1000,
) -> OptState:
    """Exact ascent until the inner gap is certified <= delta, then one
    stochastic descent step. Gap certificate: phi(x) - F(x, y) directly when
    a closed phi exists, else |grad_y F|^2/(2 mu). Budget exhaustion sets a
    warning on the state instead of failing."""
    pt = problem.check_point(state.point)
    if delta <= 0:
        raise ParameterError(f"sgdmax_step: delta must be > 0, got {delta}")
    c = problem.constants
    step = 1.0 / c.l1
    y = pt.y.copy()
    certified = False
    inner = 0

    def gap_ok(yv: np.ndarray) -> bool:
        if problem.closed_phi is not None:
            phi, _ = problem.closed_phi(pt.x)
            return phi - problem.value(JointPoint(pt.x, yv)) <= delta
        gy = problem.exact_grad(JointPoint(pt.x, yv)).gy
        return float(gy @ gy) / (2.0 * c.mu) <= delta

    while inner < inner_max_iters:
        if gap_ok(y):
            certified = True
            break
        gy = problem.exact_grad(JointPoint(pt.x, y)).gy
        y = y + step * gy
        inner += 1
    if not certified:
        certified = gap_ok(y)
    warnings = state.warnings
    if not certified:
        warnings = warnings + (f"sgdmax: inner budget {inner_max_iters} exhausted at k={state.k}",)

    gx = problem.stoch_grad(JointPoint(pt.x, y), state.rng).gx
    x_new = pt.x - alpha * gx
    return replace(
        state,
        point=JointPoint(x_new, y),
        k=state.k + 1,
        x_steps=state.x_steps + 1,
        y_steps=state.y_steps + inner,
        grad_evals=state.grad_evals + inner + 1,
        last_branch="both",
        warnings=warnings,
    )


def esgda_step(
    problem: Problem, state: OptState, alpha: float, eta: float, m: int
) -> OptState:
    """m chained stochastic ascent steps, then one stochastic descent step.
    Every update draws a fresh sample; m+1 gradient evaluations."""
    if m < 1:
        raise ParameterError(f"esgda_step: m must be >= 1, got {m}")
    pt = problem.check_point(state.point)
    y = pt.y
    for _ in range(m):
        gy = problem.stoch_grad(JointPoint(pt.x, y), state.rng).gy
        y = y + eta * gy
    gx = problem.stoch_grad(JointPoint(pt.x, y), state.rng).gx
    x_new = pt.x - alpha * gx
    return replace(
        state,
        point=JointPoint(x_new, y),
        k=state.k + 1,
        x_steps=state.x_steps + 1,
        y_steps=state.y_steps + m,
        grad_evals=state.grad_evals + m + 1,
        last_branch="both",
    )


def rsgda_step(
    problem: Problem, state: OptState, alpha: float, eta: float, p: float
) -> OptState:
    """One sample, one coin: descent in x with probability p, else ascent in
    y. Single gradient evaluation; the sample is drawn before the coin so
    stream consumption does not depend on the branch."""
    if not (0 < p <= 1):
        raise ParameterError(f"rsgda_step: p must lie in (0, 1], got {p}")
    pt = problem.check_point(state.point)
    sample = problem.draw_sample(state.rng)
    take_x = state.rng.bernoulli(p)
    g = problem.grad_with_sample(pt, sample)
    if take_x:
        new_pt = JointPoint(pt.x - alpha * g.gx, pt.y)
    else:
        new_pt = JointPoint(pt.x, pt.y + eta * g.gy)
    return replace(
        state,
        point=new_pt,
        k=state.k + 1,
        x_steps=state.x_steps + (1 if take_x else 0),
        y_steps=state.y_steps + (0 if take_x else 1),
        grad_evals=state.grad_evals + 1,
        last_branch="x" if take_x else "y",
    )


@dataclass(frozen=True)
class DiagConfig:
    """What to log and how often. h and v need phi (closed form or inner
    ascent budget) and are skipped for problems without it."""

    interval: int = 1
    grad_norms: bool = True
    h: bool = False
    v: bool = False
    dist: bool = True
    loss: bool = False
    inner_tol: float | None = None
    inner_budget: int = 10_000

    def __post_init__(self):
        if self.interval < 1:
            raise ParameterError(f"DiagConfig: interval must be >= 1, got {self.interval}")


@dataclass(frozen=True)
class RunResult:
    records: list[TraceRecord]
    final: JointPoint
    summary: dict
    provenance: dict = field(default_factory=dict)


def evals_per_step(kind: OptKind) -> int | None:
    """Fixed oracle cost per step, or None when it varies (sgdmax)."""
    if isinstance(kind, Sgda):
        return 2
    if isinstance(kind, Esgda):
        return kind.m + 1
    if isinstance(kind, Rsgda):
        return 1
    return None


def _step(problem: Problem, kind: OptKind, state: OptState, plan: StepPlan) -> OptState:
    k = state.k
    alpha, eta = plan.alpha(k), plan.eta(k)
    if isinstance(kind, Sgda):
        return sgda_step(
            problem, state, alpha, eta, strict_sample_reuse=kind.strict_sample_reuse
        )
    if isinstance(kind, SgdMax):
        return sgdmax_step(problem, state, alpha, kind.delta, kind.inner_max_iters)
    if isinstance(kind, Esgda):
        return esgda_step(problem, state, alpha, eta, kind.m)
    if isinstance(kind, Rsgda):
        return rsgda_step(problem, state, alpha, eta, plan.p(k))
    raise ParameterError(f"run: unknown optimizer kind {kind!r}")


def _metrics(problem: Problem, point: JointPoint, diag: DiagConfig) -> dict:
    out: dict = {"grad_x_norm": None, "grad_y_norm": None, "h": None, "v": None,
                 "dist": None, "loss": None}
    if diag.grad_norms:
        g = problem.exact_grad(point)
        out["grad_x_norm"] = float(np.linalg.norm(g.gx))
        out["grad_y_norm"] = float(np.linalg.norm(g.gy))
    can_phi = problem.pl_condition and (
        problem.closed_phi is not None or diag.inner_budget > 0
    )
    if diag.h and can_phi:
        out["h"] = h_metric(
            problem, point, inner_tol=diag.inner_tol, inner_budget=diag.inner_budget
        )
    if diag.v and can_phi:
        out["v"] = lyapunov(
            problem, point, inner_tol=diag.inner_tol, inner_budget=diag.inner_budget
        )
    if diag.dist and problem.dist_to_opt is not None:
        out["dist"] = float(problem.dist_to_opt(point))
    if diag.loss:
        out["loss"] = float(problem.value(point))
    return out


def run(
    problem: Problem,
    kind: OptKind,
    plan: StepPlan,
    init: JointPoint,
    iters: int,
    rng: RngStream,
    diag: DiagConfig = DiagConfig(),
    *,
    waive_constraints: bool = False,
    provenance: dict | None = None,
) -> RunResult:
    """Run `kind` for `iters` steps, logging a TraceRecord after every
    diag.interval-th step and always after the last one.

    Each row carries the post-step iterate's metrics, the branch taken by
    the step that produced it, and that step's plan values, so summary
    statistics (min h, final metrics) are recomputable from the trace alone.
    For the randomized single-sample method the plan is validated against
    the step-size constraints unless waive_constraints is set; other kinds
    carry no such certificate and only need positive steps.
    """
    if iters < 0:
        raise ParameterError(f"run: iters must be >= 0, got {iters}")
    problem.check_point(init)
    if isinstance(kind, Rsgda) and not waive_constraints and iters > 0:
        ks = tuple(sorted({0, iters // 2, iters - 1}))
        require_feasible(plan, problem.constants, ks)

    state = init_state(init, rng)
    records: list[TraceRecord] = []
    for k in range(iters):
        state = _step(problem, kind, state, plan)
        if state.k % diag.interval == 0 or state.k == iters:
            met = _metrics(problem, state.point, diag)
            records.append(
                TraceRecord(
                    k=state.k,
                    branch=state.last_branch,
                    alpha=plan.alpha(k),
                    eta=plan.eta(k),
                    p=plan.p(k) if isinstance(kind, Rsgda) else None,
                    grad_x_norm=met["grad_x_norm"],
                    grad_y_norm=met["grad_y_norm"],
                    h=met["h"],
                    v=met["v"],
                    dist=met["dist"],
                    loss=met["loss"],
                )
            )

    if records:
        last = records[-1]
        final_metrics = {
            "grad_x_norm": last.grad_x_norm,
            "grad_y_norm": last.grad_y_norm,
            "h": last.h,
            "v": last.v,
            "dist": last.dist,
            "loss": last.loss,
        }
    else:
        final_metrics = _metrics(problem, state.point, diag)
    logged_h = [r.h for r in records if r.h is not None]
    summary = {
        "kind": kind.tag,
        "plan": plan.kind,
        "iters": state.k,
        "grad_evals": state.grad_evals,
        "x_steps": state.x_steps,
        "y_steps": state.y_steps,
        "min_h": min(logged_h) if logged_h else None,
        "final_h": final_metrics["h"],
        "final_v": final_metrics["v"],
        "final_dist": final_metrics["dist"],
        "final_loss": final_metrics["loss"],
        "final_grad_x_norm": final_metrics["grad_x_norm"],
        "final_grad_y_norm": final_metrics["grad_y_norm"],
        "warnings": len(state.warnings),
    }
    prov = dict(provenance or {})
    prov.setdefault("base_seed", rng.base_seed)
    prov.setdefault("stream_id", rng.stream_id)
    return RunResult(records=records, final=state.point, summary=summary, provenance=prov)
