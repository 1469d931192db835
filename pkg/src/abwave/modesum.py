"""Brute-force mode-sum construction of spectral-multiplier kernels.

K_nu(r1, r2) = int_0^inf F(rho^2) J_nu(r1 rho) J_nu(r2 rho) rho drho is
computed by composite Gauss-Legendre quadrature on [0, rho*] and, beyond
rho*, with an exp(-eps (rho - rho*)) damping factor extrapolated to
eps -> 0.  The full kernel is the angular sum over modes k.

Bessel functions here come from ``scipy.special.jv`` so that the oracle
shares no special-function code with the closed-form kernels.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gamma, iv, jv

from .kernel import KernelPoint, region
from .quadrature import gauss_legendre
from .spectrum import FluxField, eigenfunction

__all__ = [
    "SpectralSymbol",
    "ModeKernelResult",
    "ModeSumResult",
    "ConvergenceError",
    "sine_symbol",
    "fwt_symbol",
    "heat_symbol",
    "macdonald_symbol",
    "heat_mode_closed_form",
    "mode_kernel",
    "kernel_modesum",
    "macdonald_residual",
    "DEFAULT_EPS_LADDER",
]

DEFAULT_EPS_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)


class ConvergenceError(RuntimeError):
    """Damping ladder or mode tail missed its tolerance; ``achieved`` holds the estimate."""

    def __init__(self, msg: str, achieved: float):
        super().__init__(f"{msg} (achieved {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class SpectralSymbol:
    """A function rho -> F(rho^2) with the metadata the quadrature needs.

    ``frequency`` is the oscillation frequency of F in rho (0 when F does
    not oscillate); ``decay_order`` is the polynomial decay exponent for
    the ``polynomial`` class.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    decay_class: str = "polynomial"
    decay_order: float = 0.0
    damping_needed: bool = True
    frequency: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, rho):
        return self.eval(np.asarray(rho, dtype=float))

    def check_decay(self, n: int = 4001, rho_max: float = 1e3, slack: float = 10.0) -> bool:
        """Sample |F| on [0, rho_max] against C (1 + rho)^-order."""
        rho = np.linspace(1e-6, rho_max, n)
        v = np.abs(self(rho))
        if not np.all(np.isfinite(v)):
            return False
        if self.decay_class != "polynomial":
            return True
        env = v * (1.0 + rho) ** self.decay_order
        return bool(env[n // 10:].max() <= slack * max(env[: n // 10].max(), 1e-300))


def sine_symbol(t: float) -> SpectralSymbol:
    """F(rho^2) = sin(t rho) / rho."""
    def f(rho):
        out = np.empty_like(rho)
        small = rho * t < 1e-8
        out[small] = t
        out[~small] = np.sin(t * rho[~small]) / rho[~small]
        return out
    return SpectralSymbol(f, "polynomial", 1.0, True, float(t), "sine", {"t": t})


def fwt_symbol(w: float, t: float) -> SpectralSymbol:
    """F(rho^2) = sqrt(pi/2) (t rho)^{w-1} J_{1-w}(t rho), real w in (0, 1)."""
    if complex(w).imag != 0:
        raise ValueError("the mode-sum oracle supports real w only")
    w = float(np.real(w))
    if not 0 < w < 1:
        raise ValueError("w must lie in (0, 1)")
    c0 = math.sqrt(math.pi / 2) * 2.0 ** (w - 1.0) / gamma(2.0 - w)

    def f(rho):
        x = t * np.asarray(rho, dtype=float)
        out = np.empty_like(x)
        small = x < 1e-8
        out[small] = c0
        xs = x[~small]
        out[~small] = math.sqrt(math.pi / 2) * xs ** (w - 1.0) * jv(1.0 - w, xs)
        return out
    return SpectralSymbol(f, "polynomial", 1.5 - w, True, float(t), "fwt", {"w": w, "t": t})


def heat_symbol(tau: float) -> SpectralSymbol:
    """F(rho^2) = exp(-tau rho^2); converges without damping."""
    return SpectralSymbol(lambda rho: np.exp(-tau * rho ** 2), "gaussian", 0.0, False, 0.0,
                          "heat", {"tau": tau})


def macdonald_symbol(mu: float, a: float) -> SpectralSymbol:
    """F(rho^2) = rho^{-mu} J_mu(a rho), so that rho F J J = rho^{1-mu} J_mu J J."""
    def f(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        small = rho < 1e-12
        out[small] = (0.5 * a) ** mu / gamma(mu + 1.0)
        out[~small] = rho[~small] ** (-mu) * jv(mu, a * rho[~small])
        return out
    return SpectralSymbol(f, "polynomial", mu + 0.5, True, float(a), "macdonald", {"mu": mu, "a": a})


def heat_mode_closed_form(nu: float, tau: float, r1: float, r2: float) -> float:
    """(1/(2 tau)) exp(-(r1^2 + r2^2)/(4 tau)) I_nu(r1 r2 / (2 tau))."""
    return float(np.exp(-(r1 * r1 + r2 * r2) / (4 * tau)) * iv(nu, r1 * r2 / (2 * tau)) / (2 * tau))


# --------------------------------------------------------------------------
# single mode

@dataclass(frozen=True)
class ModeKernelResult:
    value: complex
    spread: float
    eps: tuple
    damped: tuple


def _richardson(eps, vals):
    """Polynomial extrapolation to eps = 0 through all points, plus the
    difference to the extrapolant that drops the largest eps."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=complex)

    def neville(x, y):
        y = list(y)
        n = len(x)
        for j in range(1, n):
            for i in range(n - j):
                y[i] = (x[i + j] * y[i] - x[i] * y[i + 1]) / (x[i + j] - x[i])
        return y[0]

    full = neville(eps, vals)
    if len(eps) < 3:
        return full, abs(full - vals[-1])
    order = np.argsort(eps)
    sub = order[:-1]
    part = neville(eps[sub], vals[sub])
    return full, abs(full - part)


def _graded_panels(a: float, b: float, n: int, grading: int = 24, ratio: float = 0.5):
    """GL nodes on [a, b] with geometric refinement toward a."""
    edges = [a + (b - a) * ratio ** j for j in range(grading, 0, -1)]
    edges = [a] + edges + [b]
    edges = np.array(edges)
    x, w = gauss_legendre(edges[:-1], edges[1:], n)
    return x.ravel(), w.ravel()


def _uniform_panels(a: float, b: float, width: float, n: int):
    m = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, m + 1)
    x, w = gauss_legendre(edges[:-1], edges[1:], n)
    return x.ravel(), w.ravel()


def _tail_frequencies(F: SpectralSymbol, r1: float, r2: float):
    f = F.frequency
    combos = np.abs(np.array([f + r1 + r2, f + r1 - r2, f - r1 + r2, f - r1 - r2]))
    return combos.max(), combos[combos > 1e-12].min() if np.any(combos > 1e-12) else 0.0


def mode_kernel(F: SpectralSymbol, nu: float, r1: float, r2: float, eps_list=None,
                tol: float | None = None, tail_length: float = 25.0, nodes: int = 8,
                raise_on_spread: bool = False, rungs: int = 5) -> ModeKernelResult:
    """K_nu(r1, r2) = int_0^inf F(rho^2) J_nu(r1 rho) J_nu(r2 rho) rho drho.

    Parameters
    ----------
    eps_list : damping ladder; default is the geometric ladder
        0.2 * 2^-j (j = 0..rungs-1), shrunk when the slowest tail oscillation
        frequency is small so that eps stays well below it.
    tol : raise :class:`ConvergenceError` when ``raise_on_spread`` and the
        extrapolation spread exceeds it.
    """
    if nu < 0 or r1 <= 0 or r2 <= 0:
        raise ValueError("mode_kernel requires nu >= 0 and r1, r2 > 0")
    wmax, wmin = _tail_frequencies(F, r1, r2)
    width = min(1.0, math.pi / max(wmax, 1e-12))

    if not F.damping_needed:
        # Gaussian-type symbols: plain quadrature to where F is negligible
        tau = F.params.get("tau", None)
        rho_end = math.sqrt(40.0 / tau) if tau else 200.0
        vals = []
        for wd in (width, 0.5 * width):
            x, w = _graded_panels(0.0, min(1.0, rho_end), nodes)
            x2, w2 = _uniform_panels(min(1.0, rho_end), rho_end, wd, nodes)
            x = np.concatenate([x, x2])
            w = np.concatenate([w, w2])
            g = F(x) * jv(nu, r1 * x) * jv(nu, r2 * x) * x
            vals.append(complex(np.sum(w * g)))
        return ModeKernelResult(vals[1], abs(vals[1] - vals[0]), (), tuple(vals))

    rho_star = 40.0 / max(F.frequency, r1 + r2)
    if eps_list is None:
        e0 = min(0.2, 0.25 * wmin) if wmin > 0 else 0.2
        e0 = max(e0, 0.02)
        eps_list = tuple(e0 * 0.5 ** j for j in range(rungs))
    eps = np.asarray(eps_list, dtype=float)
    # J_nu(x) < exp(-0.45 nu) for x < nu/2, so high orders start late
    rho_lo = 0.5 * nu / max(r1, r2) if nu >= 30.0 else 0.0
    near = 0j
    if rho_lo < rho_star:
        # graded at 0 (rho^{2 nu + 1} behaviour), half-period panels after
        a = min(rho_lo + width, rho_star)
        x0, w0 = _graded_panels(rho_lo, a, nodes)
        x1, w1 = _uniform_panels(a, rho_star, width, nodes)
        xn = np.concatenate([x0, x1])
        wn = np.concatenate([w0, w1])
        near = complex(np.sum(wn * F(xn) * jv(nu, r1 * xn) * jv(nu, r2 * xn) * xn))
    t0 = max(rho_star, rho_lo)
    rho_end = t0 + tail_length / eps.min()
    xt, wt = _uniform_panels(t0, rho_end, width, nodes)
    gt = wt * F(xt) * jv(nu, r1 * xt) * jv(nu, r2 * xt) * xt
    damped = [near + complex(np.sum(gt * np.exp(-e * (xt - rho_star)))) for e in eps]
    value, spread = _richardson(eps, damped)
    if raise_on_spread and tol is not None and spread > tol:
        raise ConvergenceError("damping extrapolation did not converge", spread)
    return ModeKernelResult(complex(value), float(spread), tuple(float(e) for e in eps), tuple(damped))


# --------------------------------------------------------------------------
# angular sum

@dataclass(frozen=True)
class ModeSumResult:
    value: complex
    tail_estimate: float
    k_max: int
    summation: str
    modes: tuple  # (k, nu_k, K_nu, spread)


def _exp_filter(k, K, order: int = 8, strength: float = 36.0):
    x = np.abs(k) / K
    return np.exp(-strength * x ** order)


class _ModeCache:
    """dict-like view nu -> ModeKernelResult over an optional shared store."""

    def __init__(self, store, F, r1, r2, eps_list):
        self.store = {} if store is None else store
        eps = eps_list if eps_list is None or isinstance(eps_list, int) else tuple(eps_list)
        self.prefix = (F.name, tuple(sorted(F.params.items())), float(r1), float(r2), eps)

    def __contains__(self, nu):
        return (self.prefix, nu) in self.store

    def __getitem__(self, nu):
        return self.store[(self.prefix, nu)]

    def __setitem__(self, nu, value):
        self.store[(self.prefix, nu)] = value

    def keys(self):
        return {key[1] for key in self.store if key[0] == self.prefix}

    def update(self, d):
        for k, v in d.items():
            self[k] = v


def kernel_modesum(F: SpectralSymbol, p: KernelPoint, A: FluxField, k_max: int = 60,
                   tol: float = 1e-4, summation: str = "auto", k_cap: int = 480,
                   eps_list=None, threads: int = 1, raise_on_tail: bool = False,
                   mode_cache: dict | None = None, rungs: int = 5) -> ModeSumResult:
    """K = sum_k phi_k(theta1) conj(phi_k(theta2)) K_{nu_k}(r1, r2).

    ``summation``:
      * ``plain``: symmetric partial sums, doubling k_max until
        4 x |last term| < tol or ``k_cap`` is reached;
      * ``filtered``: exponential-filter weights exp(-36 (|k|/K)^8),
        doubling K until successive filtered sums differ by < tol;
      * ``auto``: ``plain`` behind the diffracted front (geometric
        convergence), ``filtered`` elsewhere (the light-cone singularity
        makes the coefficients decay only algebraically).

    ``rungs`` sets the length of the default damping ladder (ignored when
    ``eps_list`` is given); fewer rungs shorten the tail integration.

    ``mode_cache`` may be shared between calls; entries are keyed by the
    symbol, the radii and nu so that points differing only in angle reuse
    the radial integrals.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    reg = region(F.frequency, p.r1, p.r2) if F.frequency > 0 else "III"
    if summation == "auto":
        summation = "plain" if reg in ("I", "III") else "filtered"
    alpha = A.flux
    cache = _ModeCache(mode_cache, F, p.r1, p.r2, eps_list if eps_list is not None else rungs)

    def mode(nu):
        key = round(float(nu), 13)
        if key not in cache:
            cache[key] = mode_kernel(F, float(nu), p.r1, p.r2, eps_list, rungs=rungs)
        return cache[key]

    def ensure(ks):
        nus = sorted(v for v in {round(float(abs(k + alpha)), 13) for k in ks} if v not in cache)
        if threads > 1 and len(nus) > 1:
            with ThreadPoolExecutor(threads) as ex:
                res = list(ex.map(lambda v: mode_kernel(F, v, p.r1, p.r2, eps_list, rungs=rungs), nus))
            cache.update(dict(zip(nus, res)))
        else:
            for v in nus:
                mode(v)

    def terms(K):
        ks = np.arange(-K, K + 1)
        ensure(ks)
        vals = np.array([cache[round(float(abs(k + alpha)), 13)].value for k in ks])
        ph = eigenfunction(p.theta1, ks, A) * np.conj(eigenfunction(p.theta2, ks, A))
        return ks, ph * vals

    K = k_max
    if summation == "plain":
        while True:
            ks, tv = terms(K)
            total = tv.sum()
            last = max(abs(tv[0]), abs(tv[-1]))
            est = 4.0 * last
            if est < tol or K >= k_cap:
                break
            K = min(2 * K, k_cap)
    elif summation == "filtered":
        ks, tv = terms(K)
        prev = np.sum(tv * _exp_filter(ks, K))
        while True:
            K2 = min(2 * K, k_cap)
            if K2 == K:
                est = float("inf")
                total = prev
                break
            ks, tv = terms(K2)
            total = np.sum(tv * _exp_filter(ks, K2))
            est = abs(total - prev)
            K = K2
            if est < tol:
                break
            prev = total
    else:
        raise ValueError(f"unknown summation {summation!r}")
    if raise_on_tail and est > tol:
        raise ConvergenceError("mode sum truncation estimate exceeds tolerance", est)
    ks = np.arange(-K, K + 1)
    modes = tuple((int(k), float(abs(k + alpha)), cache[round(float(abs(k + alpha)), 13)].value,
                   cache[round(float(abs(k + alpha)), 13)].spread) for k in ks)
    return ModeSumResult(complex(total), float(est), int(K), summation, modes)


# --------------------------------------------------------------------------
# Macdonald three-regime formula

def _alg_quad(f, a, b, power):
    """int_a^b f(s) (b - s)^{power} ds, power > -1, via s = b - u^{1/(1+power)}."""
    q = 1.0 / (1.0 + power)

    def g(u):
        d = u ** q
        return f(b - d) * q

    val, _ = integrate.quad(g, 0.0, (b - a) ** (1.0 + power), epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def legendre_p_integral(mu_star: float, lam: float, theta: float) -> float:
    """P^{mu*}_lam(cos theta) from its integral representation, 0 < theta < pi, mu* < 1/2."""
    if not (0 < theta < math.pi) or mu_star >= 0.5:
        raise ValueError("integral representation of P requires 0 < theta < pi and mu* < 1/2")
    p = -mu_star - 0.5
    ct = math.cos(theta)

    def f(s):
        # (cos s - cos theta) = 2 sin((theta+s)/2) sin((theta-s)/2); the (theta - s)^p factor is absorbed
        d = theta - s
        if d <= 0:
            base = math.sin(theta)
        else:
            base = (math.cos(s) - ct) / d
        return base ** p * math.cos((lam + 0.5) * s)

    I = _alg_quad(f, 0.0, theta, p)
    return math.sqrt(2.0 / math.pi) * math.sin(theta) ** mu_star * I / gamma(0.5 - mu_star)


def legendre_q_integral(mu_star: float, lam: float, theta: float) -> complex:
    """Q^{mu*}_lam(cosh theta) from its integral representation, including exp(i pi mu*)."""
    if mu_star >= 0.5 or lam + mu_star + 1 <= 0:
        raise ValueError("integral representation of Q requires mu* < 1/2 and lam + mu* + 1 > 0")
    p = -mu_star - 0.5
    q = 1.0 / (1.0 + p)
    ch = math.cosh(theta)

    def near(u):
        d = u ** q
        s = theta + d
        base = 2.0 * math.sinh(theta + 0.5 * d) * math.sinh(0.5 * d) / d if d > 0 else math.sinh(theta)
        return base ** p * math.exp(-(lam + 0.5) * s) * q

    def far(s):
        return (math.cosh(s) - ch) ** p * math.exp(-(lam + 0.5) * s) if s < 600 else \
            math.exp(p * (s - math.log(2.0)) - (lam + 0.5) * s)

    I1, _ = integrate.quad(near, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=400)
    I2, _ = integrate.quad(far, theta + 1.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return (math.sqrt(math.pi / 2) * np.exp(1j * math.pi * mu_star) * math.sinh(theta) ** mu_star
            * (I1 + I2) / gamma(0.5 - mu_star))


@dataclass(frozen=True)
class MacdonaldResult:
    lhs: complex
    rhs: complex
    residual: float
    regime: str
    spread: float


def macdonald_rhs(mu: float, lam: float, a: float, b: float, c: float) -> tuple[complex, str]:
    """Closed-form value of int_0^inf t^{1-mu} J_mu(a t) J_lam(b t) J_lam(c t) dt.

    Region I (a < |b - c|): 0.
    Region II: (bc)^{mu-1} sin^{mu-1/2}(A) / ((2 pi)^{1/2} a^mu) P^{1/2-mu}_{lam-1/2}(cos A).
    Region III: (bc)^{mu-1} sinh^{mu-1/2}(A) / ((pi^3/2)^{1/2} a^mu)
                * sin(pi (mu - lam)) exp(-i pi (1/2 - mu)) Q^{1/2-mu}_{lam-1/2}(cosh A),
    with Q normalized as in its integral representation (which carries
    exp(i pi mu*)); the trigonometric factor reduces to cos(pi lam) at mu = 1/2.
    """
    if abs(mu + 0.5) < 1e-14 or abs(lam + 0.5) < 1e-14:
        raise ValueError("mu and lambda must differ from -1/2")
    reg = region(a, b, c)
    ms = 0.5 - mu
    if reg == "I":
        return 0j, reg
    if reg == "II":
        A = math.acos((b * b + c * c - a * a) / (2 * b * c))
        P = legendre_p_integral(ms, lam - 0.5, A)
        val = (b * c) ** (mu - 1) * math.sin(A) ** (mu - 0.5) / (math.sqrt(2 * math.pi) * a ** mu) * P
        return complex(val), reg
    A = math.acosh((a * a - b * b - c * c) / (2 * b * c))
    Q = legendre_q_integral(ms, lam - 0.5, A)
    trig = math.sin(math.pi * (mu - lam)) * np.exp(-1j * math.pi * ms)
    val = (b * c) ** (mu - 1) * math.sinh(A) ** (mu - 0.5) / (math.sqrt(math.pi ** 3 / 2) * a ** mu) * trig * Q
    return complex(val), reg


def macdonald_residual(mu: float, lam: float, a: float, b: float, c: float, eps_list=None) -> MacdonaldResult:
    """Compare the damped-quadrature integral with the three-regime closed form.

    In region I the closed form is 0 and ``residual`` is the absolute |lhs|.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    rhs, reg = macdonald_rhs(mu, lam, a, b, c)
    res = mode_kernel(macdonald_symbol(mu, a), lam, b, c, eps_list)
    lhs = res.value
    if reg == "I":
        resid = abs(lhs)
    else:
        resid = abs(lhs - rhs) / (abs(rhs) + 1e-300)
    return MacdonaldResult(lhs, rhs, float(resid), reg, res.spread)
