"""Special functions: complex Gamma, Bessel J of real and complex order,
the smooth cutoff psi and the Hankel-expansion remainder W_nu.

All routines accept numpy arrays in the argument ``s`` and broadcast.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre, roots_legendre

__all__ = [
    "PoleError",
    "gamma_complex",
    "loggamma_complex",
    "rgamma_complex",
    "bessel_j_real",
    "bessel_j_complex_order",
    "bessel_j_series",
    "bessel_j_hankel",
    "bessel_j_scaled",
    "psi_cutoff",
    "bessel_remainder_W",
    "SERIES_CROSSOVER",
    "HANKEL_TERMS",
]

# Bernoulli numbers B_2, B_4, ..., B_20.
_BERNOULLI = (
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
    -691.0 / 2730, 7.0 / 6, -3617.0 / 510, 43867.0 / 798, -174611.0 / 330,
)
_STIRLING_SHIFT = 16.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

SERIES_CROSSOVER = 12.0
HANKEL_TERMS = 6
_LAGUERRE_NODES = 64
_LEGENDRE_NODES = 32


class PoleError(ValueError):
    """Raised when Gamma is requested too close to one of its poles."""


def _check_poles(z: np.ndarray, dist: float = 1e-8) -> None:
    n = np.round(z.real)
    near = (n <= 0) & (np.abs(z - n) < dist)
    if np.any(near):
        bad = np.asarray(z)[near].ravel()[0]
        raise PoleError(f"Gamma pole proximity at z={bad!r}")


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    """log Gamma for Re z >= 1/2 by upward shift and the Stirling series.

    The imaginary part is only defined modulo 2*pi.
    """
    z = np.array(z, dtype=complex, copy=True)
    logprod = np.zeros_like(z)
    for _ in range(int(_STIRLING_SHIFT) + 1):
        m = z.real < _STIRLING_SHIFT
        if not m.any():
            break
        logprod[m] += np.log(z[m])
        z[m] += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    acc = np.zeros_like(z)
    term = inv
    for n, b in enumerate(_BERNOULLI, start=1):
        acc += b / (2 * n * (2 * n - 1)) * term
        term = term * inv2
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + acc - logprod


def gamma_complex(z):
    """Gamma function for complex arguments.

    Parameters
    ----------
    z : complex or array_like
        Argument; must stay at distance >= 1e-8 from the poles 0, -1, -2, ...

    Returns
    -------
    complex or ndarray

    Raises
    ------
    PoleError
        If ``z`` is within 1e-8 of a non-positive integer.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    _check_poles(z)
    left = z.real < 0.5
    zz = np.where(left, 1.0 - z, z)
    g = np.exp(_loggamma_right(zz))
    out = np.where(left, np.pi / (np.sin(np.pi * z) * np.where(left, g, 1.0)), g)
    return out[0] if scalar else out


def loggamma_complex(z):
    """Principal-sheet-free log Gamma (imaginary part modulo 2*pi), Re z >= 1/2."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.real < 0.5):
        raise ValueError("loggamma_complex requires Re z >= 1/2")
    return _loggamma_right(z)


def rgamma_complex(z):
    """Reciprocal Gamma, entire: returns 0 at the poles instead of raising."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.zeros_like(z)
    n = np.round(z.real)
    pole = (n <= 0) & (z == n)
    ok = ~pole
    out[ok] = 1.0 / gamma_complex(z[ok])
    return out[0] if scalar else out


# --------------------------------------------------------------------------
# ascending series

def bessel_j_series(kappa, s, terms: int | None = None):
    """Ascending power series for J_kappa(s), kappa complex, s >= 0.

    Cancellation limits the absolute error to roughly eps * I_0(s), so the
    series is only used below ``SERIES_CROSSOVER``.
    """
    kappa = complex(kappa)
    s = np.asarray(s, dtype=float)
    return bessel_j_scaled_series(kappa, s, terms) * _pow_pos(s, kappa)


def bessel_j_scaled_series(kappa, s, terms: int | None = None):
    """Ascending series of s**(-kappa) J_kappa(s); analytic at s = 0."""
    kappa = complex(kappa)
    s = np.asarray(s, dtype=float)
    x = -(0.5 * s) ** 2
    smax = float(np.max(s)) if s.size else 0.0
    if terms is None:
        terms = int(30 + 1.5 * smax + abs(kappa))
    coef = 2.0 ** (-kappa) * complex(rgamma_complex(kappa + 1.0))
    total = np.full(s.shape, coef, dtype=complex)
    term = np.full(s.shape, coef, dtype=complex)
    for m in range(1, terms + 1):
        term = term * x / (m * (m + kappa))
        total = total + term
        if smax < 1e-300:
            break
    return total


def _pow_pos(s: np.ndarray, kappa: complex) -> np.ndarray:
    """s**kappa for s >= 0 on the principal branch, with 0**kappa = 0 (Re kappa > 0)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=complex)
    pos = s > 0
    out[pos] = np.exp(kappa * np.log(s[pos]))
    if kappa == 0:
        out[~pos] = 1.0
    elif kappa.real <= 0:
        out[~pos] = np.inf
    return out


# --------------------------------------------------------------------------
# Hankel representation

@lru_cache(maxsize=256)
def _genlaguerre(a: float, n: int):
    x, w = roots_genlaguerre(n, a)
    return x, w


@lru_cache(maxsize=8)
def _legendre01(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _pochhammer(a: complex, j: int) -> complex:
    out = 1.0 + 0j
    for i in range(j):
        out *= a + i
    return out


def _hankel_remainder_integral(kappa: complex, s: np.ndarray, sign: int, k: int) -> np.ndarray:
    """int_0^inf e^{-u} u^{kappa+k-1/2} R_kappa(k, sign*i*u/(2s)) du.

    Generalized Gauss-Laguerre absorbs u^{Re kappa + k - 1/2}; the inner
    R_kappa integral on [0, 1] uses Gauss-Legendre.
    """
    a = kappa.real + k - 0.5
    u, wu = _genlaguerre(round(a, 12), _LAGUERRE_NODES)
    h, wh = _legendre01(_LEGENDRE_NODES)
    # R_kappa(k, i w) for every (s, u) pair
    wv = sign * u[None, :] / (2.0 * s[:, None])
    base = 1.0 + 1j * wv[:, :, None] * h[None, None, :]
    inner = ((1.0 - h) ** (k - 1))[None, None, :] * np.exp((kappa - 0.5 - k) * np.log(base))
    R = inner @ wh
    uphase = np.exp(1j * kappa.imag * np.log(u))
    return (R * uphase[None, :]) @ wu


def _hankel_h(kappa: complex, s: np.ndarray, sign: int, k: int) -> np.ndarray:
    """H^1 (sign=+1) or H^2 (sign=-1) by the k-term expansion with exact remainder."""
    z = sign * 2j * s
    acc = np.zeros(s.shape, dtype=complex)
    c = 0.5 - kappa
    for j in range(k):
        acc += _pochhammer(c, j) * complex(gamma_complex(kappa + j + 0.5)) / (math.factorial(j) * z ** j)
    rem = _pochhammer(c, k) / (math.factorial(k - 1) * z ** k)
    acc += rem * _hankel_remainder_integral(kappa, s, sign, k)
    phase = np.exp(sign * 1j * (s - 0.5 * np.pi * kappa - 0.25 * np.pi))
    return np.sqrt(2.0 / (np.pi * s)) * phase * acc / complex(gamma_complex(kappa + 0.5))


def bessel_j_hankel(kappa, s, k: int = HANKEL_TERMS):
    """J_kappa(s) = (H^1 + H^2)/2 from the Hankel integral representations.

    Valid for Re kappa > -1/2 and s > 0; accurate once s is a few units
    larger than |kappa|.
    """
    kappa = complex(kappa)
    if kappa.real <= -0.5:
        raise ValueError("Hankel representation requires Re(kappa) > -1/2")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise ValueError("Hankel representation requires s > 0")
    return 0.5 * (_hankel_h(kappa, s, +1, k) + _hankel_h(kappa, s, -1, k))


def bessel_j_complex_order(kappa, s, crossover: float = SERIES_CROSSOVER):
    """Bessel J of complex order, Re kappa > -1/2.

    Ascending series for ``s < crossover``; Hankel representations
    with a 6-term expansion and exact remainder integral above.

    Parameters
    ----------
    kappa : complex
    s : float or array_like, s > 0 (s = 0 allowed when Re kappa >= 0)

    Returns
    -------
    complex or ndarray of complex
    """
    kappa = complex(kappa)
    if kappa.real <= -0.5:
        raise ValueError("bessel_j_complex_order requires Re(kappa) > -1/2")
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    out = np.empty(s_arr.shape, dtype=complex)
    lo = s_arr < crossover
    if lo.any():
        out[lo] = bessel_j_series(kappa, s_arr[lo])
    if (~lo).any():
        out[~lo] = bessel_j_hankel(kappa, s_arr[~lo])
    return out[0] if scalar else out


def bessel_j_scaled(kappa, s, crossover: float = SERIES_CROSSOVER):
    """s**(-kappa) J_kappa(s), continuous at s = 0 with value 2^-kappa/Gamma(kappa+1)."""
    kappa = complex(kappa)
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    out = np.empty(s_arr.shape, dtype=complex)
    lo = s_arr < crossover
    if lo.any():
        out[lo] = bessel_j_scaled_series(kappa, s_arr[lo])
    if (~lo).any():
        hi = s_arr[~lo]
        out[~lo] = bessel_j_hankel(kappa, hi) * np.exp(-kappa * np.log(hi))
    return out[0] if scalar else out


# --------------------------------------------------------------------------
# real order

@lru_cache(maxsize=64)
def _legendre_ab(n: int):
    return roots_legendre(n)


def _bessel_integral(nu: float, s: np.ndarray) -> np.ndarray:
    """Schlafli's integral for J_nu(s), nu >= 0, s > 0.

    J_nu(s) = (1/pi) int_0^pi cos(nu*th - s*sin th) dth
              - (sin(nu*pi)/pi) int_0^inf exp(-s*sinh u - nu*u) du.
    """
    smax = float(np.max(s))
    n = int(40 + 1.2 * (smax + nu))
    x, w = _legendre_ab(n)
    th = 0.5 * np.pi * (x + 1.0)
    first = np.cos(nu * th[None, :] - s[:, None] * np.sin(th)[None, :]) @ (0.5 * w)
    out = first
    sn = math.sin(nu * math.pi)
    if sn != 0.0 and nu != round(nu):
        # e^{-s sinh u} is below 1e-18 once s*sinh(u) > 42
        umax = np.arcsinh(42.0 / s)
        m = 80
        xu, wu = _legendre_ab(m)
        u = 0.5 * umax[:, None] * (xu[None, :] + 1.0)
        g = np.exp(-s[:, None] * np.sinh(u) - nu * u)
        second = 0.5 * umax * (g @ wu)
        out = out - sn / math.pi * second
    return out


def bessel_j_real(nu, s):
    """Bessel J of real order nu >= 0 at real s >= 0.

    Ascending series below s = 12, Schlafli's integral representation
    above; absolute error about 1e-14 for s, nu <= 50.
    """
    nu = float(nu)
    if nu < 0:
        raise ValueError("bessel_j_real requires nu >= 0")
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if np.any(s_arr < 0):
        raise ValueError("bessel_j_real requires s >= 0")
    out = np.empty(s_arr.shape, dtype=float)
    lo = s_arr < SERIES_CROSSOVER
    if lo.any():
        out[lo] = bessel_j_series(nu, s_arr[lo]).real
    if (~lo).any():
        out[~lo] = _bessel_integral(nu, s_arr[~lo])
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# cutoff and remainder

def _sigma(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def psi_cutoff(s):
    """Smooth cutoff: 0 on [0, 1], 1 on [2, inf), C-infinity in between."""
    s = np.asarray(s, dtype=float)
    a = _sigma(s - 1.0)
    b = _sigma(2.0 - s)
    return a / (a + b)


def bessel_remainder_W(nu, s):
    """W_nu(s) = psi(s) s^-nu cos(s - pi nu/2) - sqrt(pi/2) s^-(nu-1/2) J_{nu-1/2}(s).

    Parameters
    ----------
    nu : complex with Re nu > 0
    s : float or array_like, s >= 0
    """
    nu = complex(nu)
    if nu.real <= 0:
        raise ValueError("bessel_remainder_W requires Re(nu) > 0")
    s_arr = np.asarray(s, dtype=float)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    ps = psi_cutoff(s_arr)
    cos_part = np.zeros(s_arr.shape, dtype=complex)
    on = ps > 0
    cos_part[on] = ps[on] * np.exp(-nu * np.log(s_arr[on])) * np.cos(s_arr[on] - 0.5 * np.pi * nu)
    bes = math.sqrt(math.pi / 2) * bessel_j_scaled(nu - 0.5, s_arr)
    out = cos_part - bes
    return out[0] if scalar else out
