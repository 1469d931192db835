"""Spectral-multiplier symbols and numerical checks of multiplier conditions.

Symbols m(l, s) = (1 + s^2)^{-l} e^{is}, m_l(s) = psi(s) s^{-2l} e^{is},
M_l = m - m_l, and the Bessel/remainder split psi(s) s^{-2l} e^{is} =
F(l, s) + N(l, s).  Derivatives are central finite differences with a
relative step, validated by repeating the sweep at twice the step.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .specfun import bessel_j_complex_order, bessel_remainder_W, psi_cutoff

__all__ = [
    "Symbol1D",
    "DerivativeInstabilityWarning",
    "HolderResolutionWarning",
    "m_symbol",
    "m_ell_symbol",
    "M_ell_symbol",
    "F_symbol",
    "N_symbol",
    "symbol_decomposition_residual",
    "cosine_combination_residual",
    "derivative",
    "log_grid",
    "mikhlin_norm",
    "decay_condition_check",
    "decay_constant",
    "holder_norm",
    "HolderResult",
    "holder_check",
    "bump",
    "holder_sweep",
]

SQRT_HALF_PI = math.sqrt(math.pi / 2)
REL_STEP = 1e-5


class DerivativeInstabilityWarning(UserWarning):
    """Finite-difference sups disagree across two step sizes."""


class HolderResolutionWarning(UserWarning):
    """Hoelder quotient changes with sample resolution."""


@dataclass(frozen=True)
class Symbol1D:
    """A scalar symbol s -> m(s) on s >= 0, vectorized over numpy arrays."""

    eval: Callable[[np.ndarray], np.ndarray]
    name: str = "symbol"
    derivative_order_supported: int = 2
    params: dict = field(default_factory=dict)

    def __call__(self, s):
        return self.eval(np.asarray(s, dtype=float))


def _check_ell(ell):
    if not 0.25 < ell < 0.5:
        raise ValueError("ell must lie in (1/4, 1/2)")


def m_symbol(ell: float) -> Symbol1D:
    """m(l, s) = (1 + s^2)^{-l} e^{is}."""
    return Symbol1D(lambda s: (1.0 + s * s) ** (-ell) * np.exp(1j * s), "m", params={"ell": ell})


def _m_ell(ell, s):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=complex)
    ps = psi_cutoff(s)
    on = ps > 0
    out[on] = ps[on] * s[on] ** (-2.0 * ell) * np.exp(1j * s[on])
    return out


def m_ell_symbol(ell: float) -> Symbol1D:
    """m_l(s) = psi(s) s^{-2l} e^{is}."""
    return Symbol1D(lambda s: _m_ell(ell, s), "m_ell", params={"ell": ell})


def M_ell_symbol(ell: float) -> Symbol1D:
    """M_l(s) = m(l, s) - m_l(s)."""
    return Symbol1D(lambda s: (1.0 + s * s) ** (-ell) * np.exp(1j * s) - _m_ell(ell, s),
                    "M_ell", params={"ell": ell})


def _spow(s, z):
    """s^z for s > 0 and complex z (principal branch)."""
    return np.exp(z * np.log(s))


def _F(ell, s):
    s = np.asarray(s, dtype=float)
    k1 = 2.0 * ell + 2j - 0.5
    k0 = 2.0 * ell - 0.5
    j1 = bessel_j_complex_order(k1, s)
    j0 = bessel_j_complex_order(k0, s)
    a = np.exp(1j * math.pi * ell) * _spow(s, 2j) * _spow(s, -k1) * j1
    b = np.exp(math.pi * (1j * ell - 1.0)) * _spow(s, -k0) * j0
    return SQRT_HALF_PI / math.sinh(math.pi) * (a - b)


def _N(ell, s):
    s = np.asarray(s, dtype=float)
    a = np.exp(1j * math.pi * ell) * _spow(s, 2j) * bessel_remainder_W(2.0 * ell + 2j, s)
    b = np.exp(math.pi * (1j * ell - 1.0)) * bessel_remainder_W(2.0 * ell, s)
    return (a - b) / math.sinh(math.pi)


def F_symbol(ell: float) -> Symbol1D:
    """Bessel part F(l, s) of psi(s) s^{-2l} e^{is}, s > 0."""
    _check_ell(ell)
    return Symbol1D(lambda s: _F(ell, s), "F", params={"ell": ell})


def N_symbol(ell: float) -> Symbol1D:
    """Remainder part N(l, s) of psi(s) s^{-2l} e^{is}, s > 0."""
    _check_ell(ell)
    return Symbol1D(lambda s: _N(ell, s), "N", params={"ell": ell})


def symbol_decomposition_residual(ell: float, s) -> np.ndarray | float:
    """|psi(s) s^{-2l} e^{is} - F(l, s) - N(l, s)|."""
    _check_ell(ell)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("s must be positive")
    out = np.abs(_m_ell(ell, s_arr) - _F(ell, s_arr) - _N(ell, s_arr))
    return float(out) if out.ndim == 0 else out


def cosine_combination_residual(ell, s) -> np.ndarray | float:
    """|e^{i pi l}/sinh(pi) [cos(s - pi(l + i)) - e^{-pi} cos(s - pi l)] - e^{is}|."""
    ell = np.asarray(ell, dtype=float)
    s = np.asarray(s, dtype=float)
    lhs = np.exp(1j * np.pi * ell) / math.sinh(math.pi) * (
        np.cos(s - np.pi * (ell + 1j)) - math.exp(-math.pi) * np.cos(s - np.pi * ell))
    out = np.abs(lhs - np.exp(1j * s))
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# derivative-based conditions

def derivative(sym, s, j: int, rel_step: float = REL_STEP) -> np.ndarray:
    """j-th derivative (j <= 2) by central differences with step rel_step * max(s, 1)."""
    s = np.asarray(s, dtype=float)
    if j == 0:
        return np.asarray(sym(s), dtype=complex)
    h = rel_step * np.maximum(s, 1.0)
    if j == 1:
        return (sym(s + h) - sym(s - h)) / (2.0 * h)
    if j == 2:
        return (sym(s + h) - 2.0 * sym(s) + sym(s - h)) / (h * h)
    raise ValueError("finite differences are provided for j <= 2")


def log_grid(s_max: float = 1e3, s_min: float = 1e-4, per_decade: int = 2048) -> np.ndarray:
    """Log-spaced samples on [s_min, s_max]."""
    n = int(round(per_decade * math.log10(s_max / s_min))) + 1
    return np.geomspace(s_min, s_max, n)


def _sup_pair(values_h, values_2h, label):
    a, b = float(np.max(values_h)), float(np.max(values_2h))
    if abs(a - b) > 0.01 * max(abs(a), abs(b), 1e-300):
        warnings.warn(f"{label}: finite-difference sups disagree across step sizes ({a:.4g} vs {b:.4g})",
                      DerivativeInstabilityWarning, stacklevel=3)
        return a, False
    return a, True


def mikhlin_norm(sym, j_max: int = 2, s_max: float = 1e3, s_min: float = 1e-4,
                 per_decade: int = 2048, return_terms: bool = False):
    """sum_{j <= j_max} sup_s s^j |m^{(j)}(s)| over a log grid on (0, s_max]."""
    s = log_grid(s_max, s_min, per_decade)
    terms = []
    for j in range(j_max + 1):
        d1 = s ** j * np.abs(derivative(sym, s, j))
        d2 = s ** j * np.abs(derivative(sym, s, j, 2 * REL_STEP)) if j else d1
        terms.append(_sup_pair(d1, d2, f"mikhlin j={j}")[0])
    return (sum(terms), terms) if return_terms else sum(terms)


def decay_constant(sym, sigma: float, s_max: float = 1e3, s_min: float = 1e-4,
                   per_decade: int = 2048, j_max: int = 2) -> tuple[float, list, bool]:
    """max_j sup_s (1+s)^sigma |m^{(j)}(s)|, the per-j sups, and FD stability."""
    s = log_grid(s_max, s_min, per_decade)
    w = (1.0 + s) ** sigma
    per_j = []
    stable = True
    for j in range(j_max + 1):
        d1 = w * np.abs(derivative(sym, s, j))
        d2 = w * np.abs(derivative(sym, s, j, 2 * REL_STEP)) if j else d1
        v, ok = _sup_pair(d1, d2, f"decay j={j}")
        per_j.append(v)
        stable = stable and ok
    return max(per_j), per_j, stable


def decay_condition_check(sym, sigma: float, s_max: float = 1e3, growth_tol: float = 1.05,
                          **kw) -> tuple[bool, float]:
    """(holds, C) for |m^{(j)}(s)| <= C (1+s)^{-sigma}, j <= 2.

    C is measured on (0, s_max]; the condition is judged to hold when C
    does not grow between s_max / 10 and s_max (ratio <= growth_tol) and
    the finite differences are stable.
    """
    if not sigma > 1:
        raise ValueError("sigma must exceed 1")
    c_full, _, stable = decay_constant(sym, sigma, s_max, **kw)
    c_part, _, _ = decay_constant(sym, sigma, s_max / 10.0, **kw)
    holds = bool(np.isfinite(c_full) and stable and c_full <= growth_tol * c_part)
    return holds, c_full


# --------------------------------------------------------------------------
# Hoelder norms

def _holder_quotient(x, y, lam):
    dy = np.abs(y[:, None] - y[None, :])
    dx = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(dx, np.inf)
    return float(np.max(dy / dx ** lam))


def holder_norm(x, y, s_index: float) -> float:
    """||f||_{C^{[s]}} + sup_{x != y} |f^{([s])}(x) - f^{([s])}(y)| / |x - y|^{s - [s]}.

    ``x`` sorted sample points, ``y`` samples; s_index in (0, 2], not an
    integer.  Derivatives come from second-order differences of the samples.
    """
    if not 0 < s_index <= 2 or float(s_index).is_integer():
        raise ValueError("s_index must be a non-integer in (0, 2]")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=complex)
    order = int(math.floor(s_index))
    lam = s_index - order
    derivs = [y]
    for _ in range(order):
        derivs.append(np.gradient(derivs[-1], x, edge_order=2))
    base = sum(float(np.max(np.abs(d))) for d in derivs)
    return base + _holder_quotient(x, derivs[-1], lam)


@dataclass(frozen=True)
class HolderResult:
    value: float
    coarse_value: float
    stable: bool


def holder_check(fn, a: float, b: float, s_index: float, n: int = 2049, tol: float = 0.05) -> HolderResult:
    """Hoelder norm of ``fn`` on [a, b] at n samples and at (n - 1)/4 + 1 samples.

    ``stable`` is False (and a warning is issued) when the two values
    differ by more than ``tol`` relative.
    """
    x = np.linspace(a, b, n)
    y = np.asarray(fn(x), dtype=complex)
    fine = holder_norm(x, y, s_index)
    coarse = holder_norm(x[::4], y[::4], s_index)
    stable = abs(fine - coarse) <= tol * max(abs(fine), 1e-300)
    if not stable:
        warnings.warn(f"Hoelder quotient not resolved ({coarse:.4g} -> {fine:.4g})",
                      HolderResolutionWarning, stacklevel=2)
    return HolderResult(fine, coarse, bool(stable))


def bump(s):
    """Smooth cutoff supported in (1/2, 2), equal to 1 at s = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    on = (s > 0.5) & (s < 2.0)
    q = (s[on] - 0.5) * (2.0 - s[on])
    out[on] = np.exp(2.0 - 1.0 / q)
    return out


def holder_sweep(sym, s_index: float, t_grid=None, n: int = 1025, tol: float = 0.05):
    """sup over t of ||bump(.) m(t .)||_{C^s} on [1/2, 2].

    Returns (sup, per_t values, all_stable).
    """
    if t_grid is None:
        t_grid = np.geomspace(1e-2, 1e2, 17)
    vals = []
    stable = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HolderResolutionWarning)
        for t in t_grid:
            res = holder_check(lambda s: bump(s) * sym(t * s), 0.5, 2.0, s_index, n, tol)
            vals.append(res.value)
            stable = stable and res.stable
    return max(vals), vals, stable
