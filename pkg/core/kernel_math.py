"""
Kernel Math

Fractional-order constants, built-in and custom nonlinearities with their
potentials, and closed-form reference profiles.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import integrate, interpolate, optimize, special

from core.errors import DomainError
from models.kernel import FractionalOrder, Nonlinearity, PotentialMin

logger = logging.getLogger(__name__)

SCAN_POINTS = 4096
CUSTOM_TABLE_POINTS = 257


def _check_order(s: float) -> float:
    s = float(s)
    if not np.isfinite(s) or not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in the open interval (0, 1), got {s}")
    return s


def ds_constant(s: float) -> float:
    """d_s = 2^(2s-1) Gamma(s) / Gamma(1-s)"""
    s = _check_order(s)
    return float(2.0 ** (2.0 * s - 1.0) * special.gamma(s) / special.gamma(1.0 - s))


def fractional_order(s: float) -> FractionalOrder:
    s = _check_order(s)
    return FractionalOrder(s=s, a=1.0 - 2.0 * s, ds=ds_constant(s))


def ds_limits(s: float) -> Dict[str, float]:
    """d_s next to its normalised limits 2s d_s (s -> 0) and d_s / (2(1-s)) (s -> 1)"""
    ds = ds_constant(s)
    return {
        's': float(s),
        'ds': ds,
        'two_s_ds': 2.0 * s * ds,
        'ds_over_two_one_minus_s': ds / (2.0 * (1.0 - s))
    }


def _vectorized(fn: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Accept user callables written for scalars as well as for arrays"""
    scalar_fn = np.vectorize(fn, otypes=[float])

    def wrapped(u):
        u = np.asarray(u, dtype=float)
        try:
            values = np.asarray(fn(u), dtype=float)
            if values.shape == u.shape:
                return values
            return np.broadcast_to(values, u.shape).astype(float)
        except (TypeError, ValueError):
            return scalar_fn(u)

    return wrapped


def _central_difference(f: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    def fprime(u):
        u = np.asarray(u, dtype=float)
        h = 1e-6 * (1.0 + np.abs(u))
        return (f(u + h) - f(u - h)) / (2.0 * h)
    return fprime


def _check_range(range_: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    if range_ is None:
        raise DomainError("a range [u_min, u_max] is required")
    lo, hi = float(range_[0]), float(range_[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise DomainError(f"empty or inverted range [{lo}, {hi}]")
    return lo, hi


def _custom_potential(f: Callable[[np.ndarray], np.ndarray],
                      lo: float, hi: float) -> Callable[[np.ndarray], np.ndarray]:
    """G(u) = int_u^1 f tabulated by adaptive quadrature, Hermite-interpolated"""
    nodes = np.linspace(lo, hi, CUSTOM_TABLE_POINTS)
    scalar = lambda t: float(f(np.asarray(t)))
    panels = np.array([integrate.quad(scalar, a, b, epsabs=1e-13, epsrel=1e-12)[0]
                       for a, b in zip(nodes[:-1], nodes[1:])])
    # tail[k] = int_{nodes[k]}^{hi} f
    tail = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    offset = integrate.quad(scalar, 1.0, hi, epsabs=1e-13, epsrel=1e-12)[0]
    spline = interpolate.CubicHermiteSpline(nodes, tail - offset, -f(nodes))

    def G(u):
        return np.asarray(spline(np.clip(np.asarray(u, dtype=float), lo, hi)), dtype=float)

    return G


def make_nonlinearity(kind: str, f: Optional[Callable] = None, fprime: Optional[Callable] = None,
                      range_: Optional[Tuple[float, float]] = None) -> Nonlinearity:
    """
    Build a nonlinearity by name

    Args:
        kind: 'allen_cahn', 'sine_halfs' or 'custom'
        f: force for 'custom'
        fprime: derivative of f for 'custom' (central differences when omitted)
        range_: range of the nonlinearity; narrows a built-in when given

    Returns:
        Nonlinearity with potential G(u) = int_u^1 f
    """
    if kind == 'allen_cahn':
        nl = Nonlinearity(
            name='allen_cahn',
            f=lambda u: u - u ** 3,
            fprime=lambda u: 1.0 - 3.0 * u ** 2,
            G=lambda u: 0.25 * (1.0 - u ** 2) ** 2,
            range_=(-1.0, 1.0),
            odd=True
        )
    elif kind == 'sine_halfs':
        nl = Nonlinearity(
            name='sine_halfs',
            f=lambda u: np.sin(np.pi * u) / np.pi,
            fprime=lambda u: np.cos(np.pi * u),
            G=lambda u: (1.0 + np.cos(np.pi * u)) / np.pi ** 2,
            range_=(-1.0, 1.0),
            odd=True
        )
    elif kind == 'custom':
        if f is None:
            raise DomainError("custom nonlinearity requires f")
        lo, hi = _check_range(range_)
        f_vec = _vectorized(f)
        fprime_vec = _vectorized(fprime) if fprime is not None else _central_difference(f_vec)
        return Nonlinearity(
            name='custom',
            f=f_vec,
            fprime=fprime_vec,
            G=_custom_potential(f_vec, lo, hi),
            range_=(lo, hi)
        )
    else:
        raise DomainError(f"unknown nonlinearity '{kind}'")

    if range_ is not None:
        lo, hi = _check_range(range_)
        nl = nl.restrict(lo, hi)
    return nl


def potential_min(nl: Nonlinearity) -> PotentialMin:
    """
    Global minimum of G over the range

    A dense scan picks the smallest grid minimizer; golden-section refinement
    replaces it only when it finds a strictly lower value inside the range.
    """
    lo, hi = nl.range_
    grid = np.linspace(lo, hi, SCAN_POINTS)
    values = np.asarray(nl.G(grid), dtype=float)
    k = int(np.argmin(values))
    tau = float(grid[k])
    c_u = float(values[k])

    if 0 < k < SCAN_POINTS - 1 and values[k - 1] > values[k] < values[k + 1]:
        objective = lambda t: float(nl.G(np.asarray(t, dtype=float)))
        result = optimize.minimize_scalar(
            objective,
            bracket=(grid[k - 1], grid[k], grid[k + 1]),
            method='golden'
        )
        if lo <= result.x <= hi and result.fun < c_u:
            tau = float(result.x)

    c_u = float(np.asarray(nl.G(np.array([tau])), dtype=float)[0])
    return PotentialMin(c_u=c_u, tau=tau)


def potential_max(nl: Nonlinearity) -> float:
    """Maximum of G over the range on the scan grid"""
    grid = np.linspace(nl.u_min, nl.u_max, SCAN_POINTS)
    return float(np.max(nl.G(grid)))


def sign_extension_profile(s: float, t: np.ndarray) -> np.ndarray:
    """
    Weighted-harmonic extension of sign(x) in one base dimension at t = x / lambda

    Equals the regularized incomplete beta function I_{t^2/(1+t^2)}(1/2, s)
    with the sign of t; for s = 1/2 this is (2/pi) arctan t.
    """
    s = _check_order(s)
    t = np.asarray(t, dtype=float)
    w = t ** 2 / (1.0 + t ** 2)
    return np.sign(t) * special.betainc(0.5, s, w)


def explicit_half_layer(x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Layer (2/pi) arctan(x / (1 + lambda)) for s = 1/2 and f = sin(pi u)/pi"""
    return (2.0 / np.pi) * np.arctan(np.asarray(x, dtype=float) / (1.0 + np.asarray(lam, dtype=float)))


def explicit_half_layer_gradient(x: np.ndarray, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    shifted = 1.0 + np.asarray(lam, dtype=float)
    scale = (2.0 / np.pi) / (shifted ** 2 + x ** 2)
    return scale * shifted, -scale * x


def bound_integral(s: float, epsilon: float) -> float:
    """int_epsilon^1 rho^(-2s) d rho in closed form"""
    s = _check_order(s)
    if abs(1.0 - 2.0 * s) < 1e-12:
        return float(np.log(1.0 / epsilon))
    return float((1.0 - epsilon ** (1.0 - 2.0 * s)) / (1.0 - 2.0 * s))
