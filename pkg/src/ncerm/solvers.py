"""Norm-ball projections, constrained least squares, and local refinement."""

from __future__ import annotations

import math

import numpy as np

LS_MAX_ITER = 500
LS_RTOL = 1e-8
_STEP_FLOOR = 1e-13
_STALL_REJECTS = 25
_GAIN_RTOL = 1e-8
_FEAS_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge within its fixed budget."""


def project_l1(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of the given radius.

    Sort-based soft thresholding: the unique theta >= 0 with
    sum_i max(|v_i| - theta, 0) = radius is found from the sorted
    magnitudes, then applied with the original signs.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, len(u) + 1)
    rho = np.nonzero(u * j > (css - radius))[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _lp_coordinate_solve(a: np.ndarray, lam: float, p: float) -> np.ndarray:
    """Solve w + lam*p*w^(p-1) = a coordinatewise for w in [0, a].

    The left side is strictly increasing in w, so bisection converges;
    64 halvings put the error near machine precision relative to a.
    """
    lo = np.zeros_like(a)
    hi = a.copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        val = mid + lam * p * np.power(mid, p - 1.0, where=mid > 0, out=np.zeros_like(mid))
        too_big = val > a
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    return 0.5 * (lo + hi)


def project_lp(v: np.ndarray, p: float, radius: float) -> np.ndarray:
    """Euclidean projection onto the l_p ball, p in (1, 2].

    p = 2 rescales.  For p in (1, 2) the KKT system
    w_i + lam*p*w_i^(p-1) = |v_i| is solved by bisection on the dual
    scalar lam until the constraint is active.
    """
    if not (1.0 < p <= 2.0):
        raise ValueError("p must be in (1, 2]")
    if radius <= 0:
        raise ValueError("radius must be positive")
    v = np.asarray(v, dtype=float)
    if p == 2.0:
        norm = math.sqrt(float(v @ v))
        if norm <= radius:
            return v.copy()
        return v * (radius / norm)
    norm = float(np.sum(np.abs(v) ** p) ** (1.0 / p))
    if norm <= radius:
        return v.copy()
    a = np.abs(v)

    def constraint(lam: float) -> float:
        w = _lp_coordinate_solve(a, lam, p)
        return float(np.sum(w**p) ** (1.0 / p)) - radius

    lam_lo, lam_hi = 0.0, 1.0
    for _ in range(200):
        if constraint(lam_hi) <= 0:
            break
        lam_lo = lam_hi
        lam_hi *= 2.0
    else:
        raise ConvergenceError("l_p projection: dual upper bracket not found")
    for _ in range(100):
        mid = 0.5 * (lam_lo + lam_hi)
        if constraint(mid) > 0:
            lam_lo = mid
        else:
            lam_hi = mid
    w = _lp_coordinate_solve(a, lam_hi, p)
    return np.sign(v) * w


def project(v: np.ndarray, p: float, radius: float) -> np.ndarray:
    """Projection onto the l_p ball for p in [1, 2]."""
    if p == 1.0:
        return project_l1(v, radius)
    return project_lp(v, p, radius)


def constrained_least_squares(
    X: np.ndarray,
    u: np.ndarray,
    p: float,
    radius: float,
    max_iter: int = LS_MAX_ITER,
    rtol: float = LS_RTOL,
) -> np.ndarray:
    """argmin_{||w||_p <= radius} ||X w - u||_2^2 by projected gradient.

    Starts at 0 (always feasible), steps with 1 over the gradient's
    Lipschitz constant 2*sigma_max(X)^2, and stops early once the
    objective improvement falls below rtol relative tolerance.
    """
    X = np.asarray(X, dtype=float)
    u = np.asarray(u, dtype=float)
    k, d = X.shape
    if u.shape != (k,):
        raise ValueError("u must have one entry per row of X")
    sigma = float(np.linalg.norm(X, 2)) if X.any() else 0.0
    w = np.zeros(d)
    if sigma == 0.0:
        return w
    # Gradient 2 X^T resid times step 1/(2 sigma^2) folds into one matrix.
    step_T = X.T / (sigma * sigma)
    resid = X @ w - u
    obj = float(resid @ resid)
    for _ in range(max_iter):
        w_new = project(w - step_T @ resid, p, radius)
        resid_new = X @ w_new - u
        obj_new = float(resid_new @ resid_new)
        if obj_new > obj:
            break
        improved = obj - obj_new
        w, resid, obj = w_new, resid_new, obj_new
        if improved <= rtol * max(obj, 1e-12):
            break
    return w


def monotone_descent(x0, risk_fn, grad_fn, project_fn, step_budget: int):
    """Projected subgradient descent that never accepts a worse point.

    Backtracking on rejection (step halved), mild growth on acceptance.
    The gradient is recomputed only after an accepted step; rejections
    leave the iterate (and hence its gradient) unchanged.  Stops when the
    step floor is reached, 25 rejections happen in a row, an accepted
    step improves the risk by less than a 1e-8 relative tolerance, the
    gradient vanishes, or the budget of attempted steps is spent.
    Returns (x, risk(x)) with risk(x) <= risk(x0).
    """
    x = np.asarray(x0, dtype=float).copy()
    risk = float(risk_fn(x))
    if step_budget <= 0:
        return x, risk
    eta = 1.0
    g = None
    rejects = 0
    for _ in range(step_budget):
        if g is None:
            g = np.asarray(grad_fn(x), dtype=float)
            gnorm = math.sqrt(float(g @ g))
            if gnorm == 0.0:
                break
        x_new = project_fn(x - (eta / max(gnorm, 1.0)) * g)
        risk_new = float(risk_fn(x_new))
        if risk_new < risk:
            gain = risk - risk_new
            x, risk = x_new, risk_new
            g = None
            rejects = 0
            eta = min(eta * 1.25, 1e3)
            if gain <= _GAIN_RTOL * max(abs(risk), 1e-3):
                break
        else:
            eta *= 0.5
            rejects += 1
            if eta < _STEP_FLOOR or rejects >= _STALL_REJECTS:
                break
    return x, risk


def _linear_refine(w0, data, loss, p: float, radius: float, step_budget: int):
    """Refine a linear predictor under ||w||_p <= radius; monotone in risk."""
    Z = data.labels[:, None] * data.features
    a = data.weights
    # Negation is exact in IEEE arithmetic, so hoisting it out of the
    # loop leaves every risk and gradient value bit-identical.
    Zneg = -Z
    ZnegT = Zneg.T

    def risk_fn(w):
        return float(a @ loss.value(Zneg @ w))

    def grad_fn(w):
        t = Zneg @ w
        return ZnegT @ (a * loss.grad(t))

    def project_fn(w):
        return project(w, p, radius)

    w, _ = monotone_descent(w0, risk_fn, grad_fn, project_fn, step_budget)
    return w


def refine(model, data, loss, step_budget: int, spec=None):
    """Local search from a feasible model; output stays feasible and its
    risk never exceeds the input's.  step_budget = 0 returns the input.

    Linear models refine over their own l_p ball; networks need their
    class spec and refine all weights jointly with per-level projections.
    """
    from .halfspace import LinearModel

    if isinstance(model, LinearModel):
        w = _linear_refine(
            model.w, data, loss, model.p_exponent, model.radius, step_budget
        )
        return LinearModel(w, model.p_exponent, model.radius)
    from .networks import refine_network

    if spec is None:
        raise ValueError("network refinement requires the class spec")
    return refine_network(model, spec, data, loss, step_budget)
