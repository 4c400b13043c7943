"""One-step merit descent: feasible steps keep the residual nonnegative.

The merit function V = phi + C*(phi - F) must drop by at least
p*alpha*h(x, y) per randomized step, in expectation over the branch coin,
whenever (alpha, eta, p) satisfy the step-size constraints. The residual
(actual expected drop minus required drop) is computed exactly here since
the quadratic instances expose closed-form phi.

descent_check refuses infeasible steps outright, so the second half
recomputes the raw residual by hand from the public merit and efficiency
metrics to show what goes wrong when the constraints are ignored: starving
the ascent branch turns the residual negative.
"""
import numpy as np

from gdakit.core import ConstraintError, RngStream
from gdakit.diagnostics import descent_check, h_metric, lyapunov
from gdakit.problems import JointPoint, random_ncpl_instance
from gdakit.schedules import p_max, step_constraints


def raw_residual(prob, pt, alpha: float, eta: float, p: float) -> float:
    """Expected merit drop minus p*alpha*h, with no feasibility guard."""
    g = prob.exact_grad(pt)
    v0 = lyapunov(prob, pt)
    v_x = lyapunov(prob, JointPoint(pt.x - alpha * g.gx, pt.y))
    v_y = lyapunov(prob, JointPoint(pt.x, pt.y + eta * g.gy))
    return v0 - (p * v_x + (1.0 - p) * v_y) - p * alpha * h_metric(prob, pt)


def main() -> None:
    prob = random_ncpl_instance(1)
    c = prob.constants
    p = p_max(c)
    sc = step_constraints(c, p)
    alpha = 0.5 * sc.alpha_max
    lo, hi = sc.eta_lo(alpha), sc.eta_hi

    rng = RngStream(77, stream_id=0)
    samples = []
    for _ in range(500):
        pt = prob.random_point(rng, 2.0)
        eta = lo + (hi - lo) * rng.uniform()
        samples.append((pt, eta, descent_check(prob, pt, alpha, eta, p).residual))
    res = np.array([r for _, _, r in samples])
    print(f"feasible steps (p = {p:.4f}, alpha = {alpha:.4f}, "
          f"eta in [{lo:.4f}, {hi:.4f}]):")
    print(f"  residual min/median/max over 500 samples: "
          f"{res.min():.4e} / {np.median(res):.4e} / {res.max():.4e}")
    print("  all nonnegative: every feasible step makes the promised progress\n")

    bad_eta, bad_p = 0.01 * lo, min(1.0, 10.0 * p)
    try:
        descent_check(prob, samples[0][0], alpha, bad_eta, bad_p)
    except ConstraintError as exc:
        print(f"descent_check refuses the broken plan: {exc}\n")

    worst = min(raw_residual(prob, pt, alpha, bad_eta, bad_p)
                for pt, _, _ in samples)
    print(f"raw residual under the broken plan (eta = {bad_eta:.5f}, "
          f"p = {bad_p:.3f}):")
    print(f"  worst over the same 500 points: {worst:.4f}")
    print("  negative: with the ascent branch starved, the merit bound fails")


if __name__ == "__main__":
    main()
