"""
Numerical helpers shared by the tax engine models
Adaptive quadrature, refined trapezoid integration and bracketed root search
"""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from utils.config import get_settings
from utils.logger import setup_logger

logger = setup_logger(__name__)

MAX_DOUBLINGS = 12


def adaptive_quad(
    fn: Callable[[float], float],
    lower: float,
    upper: float,
    breakpoints: Optional[Sequence[float]] = None,
) -> float:
    """
    Integrate fn over [lower, upper] with scipy's adaptive QUADPACK routine
    """
    if upper <= lower:
        return 0.0
    settings = get_settings()
    points = None
    if breakpoints:
        inner = sorted(p for p in breakpoints if lower < p < upper)
        points = inner or None
    value, _ = integrate.quad(
        fn, lower, upper,
        epsabs=settings.quad_abs_tol,
        epsrel=1e-10,
        limit=200,
        points=points,
    )
    return float(value)


def refined_trapezoid(
    fn: Callable[[float], float],
    lower: float,
    upper: float,
    rel_tol: Optional[float] = None,
    f_lower: Optional[float] = None,
    f_upper: Optional[float] = None,
) -> Tuple[float, bool]:
    """
    Composite trapezoid rule on [lower, upper], doubling the node count until two
    successive estimates agree to rel_tol (Richardson check).

    Returns (estimate, converged).
    """
    if upper <= lower:
        return 0.0, True
    settings = get_settings()
    tol = settings.richardson_tol if rel_tol is None else rel_tol

    fa = fn(lower) if f_lower is None else f_lower
    fb = fn(upper) if f_upper is None else f_upper
    width = upper - lower
    estimate = 0.5 * width * (fa + fb)

    n = 1
    for _ in range(MAX_DOUBLINGS):
        step = width / n
        midpoints = lower + step * (np.arange(n) + 0.5)
        mid_sum = float(sum(fn(float(x)) for x in midpoints))
        refined = 0.5 * estimate + 0.5 * step * mid_sum
        scale = max(abs(refined), settings.quad_abs_tol)
        if abs(refined - estimate) <= tol * scale:
            return refined, True
        estimate = refined
        n *= 2
    logger.debug(f"trapezoid refinement on [{lower}, {upper}] stopped after {n} panels without converging")
    return estimate, False


def scan_sign_changes(
    fn: Callable[[float], float],
    lower: float,
    upper: float,
    n_scan: int = 256,
) -> List[Tuple[float, float]]:
    """Brackets [a, b] on which fn changes sign (or hits zero at a node)."""
    xs = np.linspace(lower, upper, n_scan + 1)
    values = [fn(float(x)) for x in xs]
    brackets = []
    for i in range(n_scan):
        fa, fb = values[i], values[i + 1]
        if fa == 0.0:
            brackets.append((float(xs[i]), float(xs[i])))
        elif fa * fb < 0.0:
            brackets.append((float(xs[i]), float(xs[i + 1])))
    if values[-1] == 0.0:
        brackets.append((float(xs[-1]), float(xs[-1])))
    return brackets


def bracketed_root(fn: Callable[[float], float], lower: float, upper: float) -> float:
    """
    Brent's bisection/secant hybrid on a sign-changing bracket
    """
    if lower == upper:
        return lower
    settings = get_settings()
    return float(optimize.brentq(fn, lower, upper, xtol=settings.root_tol * 1e-2, rtol=4 * np.finfo(float).eps, maxiter=500))


def expand_bracket(
    fn: Callable[[float], float],
    start: float,
    factor: float = 2.0,
    max_steps: int = 200,
) -> Tuple[float, float]:
    """
    Grow [start/factor^k, start*factor^k] until fn changes sign across it.
    For positive-domain residuals that are decreasing in x.
    """
    lo, hi = start, start
    f_lo, f_hi = fn(lo), fn(hi)
    for _ in range(max_steps):
        if f_lo >= 0.0 >= f_hi:
            return lo, hi
        if f_lo < 0.0:
            lo /= factor
            f_lo = fn(lo)
        if f_hi > 0.0:
            hi *= factor
            f_hi = fn(hi)
    raise ArithmeticError(f"could not bracket a root starting from {start}")


def relative_gap(a: float, b: float) -> float:
    denom = max(abs(a), abs(b))
    return 0.0 if denom == 0.0 else abs(a - b) / denom
