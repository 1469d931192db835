"""Propagators applied to polar-grid data, L^p norms, Schur integrals and
random operator-norm probes.

Both propagation paths work mode by mode in the magnetic eigenbasis: the
input is split into angular coefficients a_k(r), each is mapped by a
radial kernel K_{nu_k}(r1, r2), and the result is resynthesized.

* ``closed-form-kernel``: K_nu is the angular Fourier coefficient of the
  closed-form kernel G + D.  For G the theta integral is done by
  tanh-sinh quadrature, which absorbs the light-cone endpoint
  singularity; D depends on the angle only through B_alpha and S_alpha,
  whose Fourier coefficients cos(pi nu) e^{-nu s} and sin(pi nu) e^{-nu s}
  are exact, so only the s integral remains.  The r2 integral is split at
  the light-cone radii |r1 - t| and r1 + t.
* ``mode-sum``: K_nu is applied spectrally, a_k -> H_nu[F(rho^2) H_nu[a_k]].
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import BarycentricInterpolator
from scipy.special import jv, roots_legendre

from .kernel import _log_sinh, fwt_prefactors
from .quadrature import gauss_laguerre, sinpi, tanh_sinh
from .specfun import bessel_j_scaled
from .spectrum import (FluxField, PolarField, angular_coefficients, eigenvalue,
                       hankel_transform, reconstruct)

__all__ = [
    "PropagationRequest",
    "ResolutionWarning",
    "apply_propagator",
    "radial_mode_kernel",
    "spectral_symbol_values",
    "lp_norm",
    "schur_lightcone",
    "schur_diffractive",
    "schur_diffractive_sup",
    "random_band_limited_field",
    "operator_norm_probe",
    "free_sine_solution",
]

TWO_PI = 2.0 * math.pi
_PATHS = {"closed-form-kernel": "closed-form-kernel", "kernel": "closed-form-kernel",
          "mode-sum": "mode-sum", "modesum": "mode-sum"}


class ResolutionWarning(UserWarning):
    """Input is not resolved or does not decay on its grid."""


@dataclass(frozen=True)
class PropagationRequest:
    """Immutable description of one propagation.

    ``kind`` is ``sine`` for sin(t sqrt(L_A))/sqrt(L_A) or ``fwt`` for
    f_{w,t}(L_A); ``k_max`` limits the angular modes (default: all modes
    the theta grid resolves).
    """

    kind: str
    t: float
    A: FluxField
    input: PolarField
    path: str = "closed-form-kernel"
    w: complex | None = None
    k_max: int | None = None

    def __post_init__(self):
        if self.kind not in ("sine", "fwt"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.path not in _PATHS:
            raise ValueError(f"unknown path {self.path!r}")
        object.__setattr__(self, "path", _PATHS[self.path])
        if self.kind == "fwt":
            if self.w is None or not 0.0 < complex(self.w).real < 1.0:
                raise ValueError("fwt requests need 0 < Re w < 1")
            object.__setattr__(self, "w", complex(self.w))

    @property
    def modes(self) -> int:
        k = (self.input.n_theta - 1) // 2
        return k if self.k_max is None else min(int(self.k_max), k)


# --------------------------------------------------------------------------
# closed-form radial kernels

def _g_coeff(kind, w, t, r1, r2, nus, reg3, h):
    """2 C int_0^beta base^{-w} cos(nu theta) dtheta (base = t^2 - |x-y|^2)."""
    k4 = 4.0 * r1 * r2
    if not reg3:
        c = np.clip((r1 * r1 + r2 * r2 - t * t) / (2.0 * r1 * r2), -1.0, 1.0)
        b1 = np.arccos(c)
        th, _, db, wq = tanh_sinh(np.zeros_like(b1), b1, h)
        base = k4[:, None] * np.sin(0.5 * (b1[:, None] + th)) * np.sin(0.5 * db)
    else:
        th, _, db, wq = tanh_sinh(np.zeros_like(r1), np.full_like(r1, math.pi), h)
        gap = (t - r1 - r2) * (t + r1 + r2)
        base = gap[:, None] + k4[:, None] * np.sin(0.5 * db) ** 2
    if kind == "sine":
        c0 = 1.0 / TWO_PI
        expo = 0.5
    else:
        c0 = fwt_prefactors(w, t)[0]
        expo = w
    # nodes whose base underflows carry negligible weight
    ok = base > 0
    f = np.zeros(base.shape, dtype=complex)
    f[ok] = wq[ok] * np.exp(-expo * np.log(base[ok]))
    return 2.0 * c0 * np.einsum("pn,pnm->pm", f, np.cos(th[:, :, None] * nus))


def _sine_d_coeff(t, r1, r2, nus, h):
    """-(1/pi) sin(pi nu) int_0^beta2 Y^{-1/2} e^{-nu s} ds."""
    gap = (t - r1 - r2) * (t + r1 + r2)
    b2 = 2.0 * np.arcsinh(np.sqrt(gap / (4.0 * r1 * r2)))
    s, _, db, wq = tanh_sinh(np.zeros_like(b2), b2, h)
    logy = np.log(4.0 * r1 * r2)[:, None] + _log_sinh(0.5 * (b2[:, None] + s)) + _log_sinh(0.5 * db)
    f = wq * np.exp(-0.5 * logy)
    integ = np.einsum("pn,pnm->pm", f, np.exp(-s[:, :, None] * nus))
    return -(sinpi(nus) / math.pi) * integ


def _fwt_d_coeff(w, t, r1, r2, nus, h, n_tail=48):
    """2 pi C_D sin(pi (w + nu)) int_{beta2}^inf X^{-w} e^{-nu s} ds."""
    gap = (t - r1 - r2) * (t + r1 + r2)
    b2 = 2.0 * np.arcsinh(np.sqrt(gap / (4.0 * r1 * r2)))
    lk4 = np.log(4.0 * r1 * r2)[:, None]
    # s = beta2 + u^q, q = 1/(1 - Re w), removes the endpoint singularity
    q = 1.0 / (1.0 - w.real)
    _, u, _, wq = tanh_sinh(np.zeros_like(b2), np.ones_like(b2), h)
    logu = np.log(u)
    da = np.exp(q * logu)
    y = 0.5 * da
    ym = np.maximum(y, 1e-6)
    lsh = q * logu - math.log(2.0) + np.where(y < 1e-6, y * y / 6.0, np.log(np.sinh(ym) / ym))
    s = b2[:, None] + da
    logx = lk4 + _log_sinh(b2[:, None] + y) + lsh
    jac = q * np.exp((q - 1.0) * logu - w * logx)
    near = np.einsum("pn,pnm->pm", wq * jac, np.exp(-s[:, :, None] * nus))
    out = near
    for j, nu in enumerate(nus):
        rate = w.real + nu
        st, wt = gauss_laguerre(b2 + 1.0, np.full_like(b2, rate), n_tail)
        logx = lk4 + _log_sinh(0.5 * (st + b2[:, None])) + _log_sinh(0.5 * (st - b2[:, None]))
        out[:, j] = out[:, j] + np.sum(wt * np.exp(-w * logx - nu * st), axis=-1)
    cd = fwt_prefactors(w, t)[1]
    return TWO_PI * cd * np.sin(np.pi * (w + nus)) * out


def radial_mode_kernel(kind: str, t: float, r1, r2, nus, w=None, h: float = 1.0 / 16) -> np.ndarray:
    """Closed-form K_nu(r1, r2) for every pair (r1, r2) and every nu.

    K_nu(r1, r2) = int_{-pi}^{pi} K(r1, r2, theta) e^{i k theta} dtheta
    with nu = |k + alpha|, i.e. the coefficient the mode sum uses.  Points
    on region boundaries are not special-cased; callers keep off them.

    Returns
    -------
    ndarray of shape (len(pairs), len(nus)), complex
    """
    r1, r2 = np.broadcast_arrays(np.atleast_1d(np.asarray(r1, float)),
                                 np.atleast_1d(np.asarray(r2, float)))
    r1 = r1.ravel()
    r2 = r2.ravel()
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    if kind == "fwt":
        w = complex(w)
        if not 0.0 < w.real < 1.0:
            raise ValueError("fwt kernels need 0 < Re w < 1")
    elif kind != "sine":
        raise ValueError(f"unknown kind {kind!r}")
    out = np.zeros((r1.size, nus.size), dtype=complex)
    reg2 = (t > np.abs(r1 - r2)) & (t < r1 + r2)
    reg3 = t > r1 + r2
    if reg2.any():
        out[reg2] = _g_coeff(kind, w, t, r1[reg2], r2[reg2], nus, False, h)
    if reg3.any():
        if kind == "sine":
            out[reg3] = (_g_coeff(kind, w, t, r1[reg3], r2[reg3], nus, True, h)
                         + _sine_d_coeff(t, r1[reg3], r2[reg3], nus, h))
        else:
            out[reg3] = _fwt_d_coeff(w, t, r1[reg3], r2[reg3], nus, h)
    return out


def _closed_form_modes(req: PropagationRequest, coeffs: dict, h: float):
    f = req.input
    r = f.r_nodes
    r_top = f.r_max if f.r_max is not None else r[-1]
    ks = sorted(coeffs)
    nus = eigenvalue(np.array(ks), req.A).astype(float)
    amat = np.stack([coeffs[k] for k in ks], axis=1)  # (n_r, modes)
    t = req.t
    out = np.zeros_like(amat)
    # barycentric interpolation of a_k between the radial nodes
    # fixed rng: the weight computation permutes nodes at random, which breaks byte determinism
    interp = BarycentricInterpolator(r, amat, rng=np.random.default_rng(0))
    for i, r1 in enumerate(r):
        pieces = []
        lo = abs(r1 - t)
        if t > r1:
            pieces.append((0.0, t - r1))
        pieces.append((lo, r1 + t))
        xs, ws = [], []
        for a, b in pieces:
            b = min(b, r_top)
            if b <= a:
                continue
            x, _, _, wq = tanh_sinh(a, b, h)
            xs.append(x)
            ws.append(wq)
        if not xs:
            continue
        x = np.concatenate(xs)
        wq = np.concatenate(ws)
        K = radial_mode_kernel(req.kind, t, np.full_like(x, r1), x, nus, req.w, h)
        a_at = interp(x)
        out[i] = np.sum((wq * x)[:, None] * K * a_at, axis=0)
    return {k: out[:, j] for j, k in enumerate(ks)}


# --------------------------------------------------------------------------
# spectral (mode-sum) path

def spectral_symbol_values(kind: str, t: float, rho, w=None) -> np.ndarray:
    """F(rho^2) for the two propagators (complex w allowed)."""
    rho = np.asarray(rho, dtype=float)
    x = t * rho
    if kind == "sine":
        out = np.where(x > 0, np.sin(x) / np.where(rho > 0, rho, 1.0), t)
        return out.astype(complex)
    w = complex(w)
    # (t rho)^{w-1} J_{1-w}(t rho) is the scaled Bessel function of order 1 - w
    return math.sqrt(math.pi / 2) * np.asarray(bessel_j_scaled(1.0 - w, x), dtype=complex)


def _rho_grid(f: PolarField, amat: np.ndarray, nus):
    r = f.r_nodes
    r_top = f.r_max if f.r_max is not None else r[-1]
    cap = math.pi * r.size / r_top
    probe = np.linspace(0.0, cap, 257)[1:]
    mags = np.zeros_like(probe)
    for j, nu in enumerate(nus):
        mags = np.maximum(mags, np.abs(hankel_transform(amat[:, j], r, f.r_weights, nu, probe, warn=False)))
    top = mags.max()
    if top == 0:
        return np.array([1.0]), np.array([0.0])
    big = np.nonzero(mags > 1e-10 * top)[0]
    rho_max = probe[min(big[-1] + 2, probe.size - 1)]
    if big[-1] >= probe.size - 2:
        warnings.warn("input spectrum is not resolved by the radial grid", ResolutionWarning, stacklevel=3)
    n = int(0.5 * r_top * rho_max) + 96
    x, wl = roots_legendre(n)
    rho = 0.5 * rho_max * (x + 1.0)
    return rho, 0.5 * rho_max * wl * rho


def _mode_sum_modes(req: PropagationRequest, coeffs: dict):
    f = req.input
    ks = sorted(coeffs)
    nus = eigenvalue(np.array(ks), req.A).astype(float)
    amat = np.stack([coeffs[k] for k in ks], axis=1)
    rho, rw = _rho_grid(f, amat, nus)
    F = spectral_symbol_values(req.kind, req.t, rho, req.w)
    out = {}
    for j, k in enumerate(ks):
        ahat = hankel_transform(amat[:, j], f.r_nodes, f.r_weights, nus[j], rho, warn=False)
        out[k] = hankel_transform(F * ahat, rho, rw, nus[j], f.r_nodes, warn=False)
    return out


def apply_propagator(req: PropagationRequest, quad_tol: float = 1e-9) -> PolarField:
    """Apply sin(t sqrt(L_A))/sqrt(L_A) or f_{w,t}(L_A) to ``req.input``.

    ``quad_tol`` selects the tanh-sinh step of the closed-form path
    (h = 1/16 reaches about 1e-10; h = 1/8 is used for quad_tol >= 1e-6).
    Output lives on the input grid.
    """
    f = req.input
    edge = np.max(np.abs(f.values[-1]))
    if edge > 1e-10 * max(np.max(np.abs(f.values)), 1e-300):
        warnings.warn("input does not decay at the outer radius", ResolutionWarning, stacklevel=2)
    K = req.modes
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        coeffs = angular_coefficients(f, req.A, K)
    if req.path == "mode-sum":
        out = _mode_sum_modes(req, coeffs)
    else:
        h = 1.0 / 16 if quad_tol < 1e-6 else 1.0 / 8
        out = _closed_form_modes(req, coeffs, h)
    vals = reconstruct(out, f.theta_nodes, req.A)
    return f.with_values(vals)


# --------------------------------------------------------------------------
# norms and Schur integrals

def lp_norm(f: PolarField, p: float) -> float:
    """(int |f|^p r dr dtheta)^{1/p} on the grid; p = inf is the node maximum."""
    if p == math.inf or p == float("inf"):
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError("p must be >= 1")
    dth = TWO_PI / f.n_theta
    s = np.sum(f.r_weights[:, None] * np.abs(f.values) ** p) * dth
    return float(s ** (1.0 / p))


def schur_lightcone(t: float, sigma: float = 0.5) -> float:
    """int_{|y|<t} (t^2 - |y|^2)^{-sigma} dy by Jacobi-weighted quadrature.

    Equals pi t^{2 - 2 sigma} / (1 - sigma); 2 pi t at sigma = 1/2.
    """
    if not t > 0 or not 0 <= sigma < 1:
        raise ValueError("need t > 0 and 0 <= sigma < 1")
    val, _ = integrate.quad(lambda r: r * (t + r) ** (-sigma), 0.0, t, weight="alg",
                            wvar=(0.0, -sigma), epsabs=0.0, epsrel=1e-13)
    return TWO_PI * val


def schur_diffractive(t: float, r1: float, sigma: float = 0.5) -> float:
    """int_{R^2} 1_{t > r1 + |y|} (t^2 - (r1 + |y|)^2)^{-sigma} dy."""
    if not t > 0 or r1 < 0 or not 0 <= sigma < 1:
        raise ValueError("need t > 0, r1 >= 0 and 0 <= sigma < 1")
    L = t - r1
    if L <= 0:
        return 0.0
    val, _ = integrate.quad(lambda r: r * (t + r1 + r) ** (-sigma), 0.0, L, weight="alg",
                            wvar=(0.0, -sigma), epsabs=0.0, epsrel=1e-13)
    return TWO_PI * val


def schur_diffractive_sup(t: float, sigma: float = 0.5, n: int = 64) -> float:
    """sup over r1 in [0, t) of :func:`schur_diffractive` (attained at r1 = 0 or nearby)."""
    r1 = t * (1.0 - np.cos(0.5 * np.pi * np.arange(n) / n))
    return max(schur_diffractive(t, float(x), sigma) for x in r1)


# --------------------------------------------------------------------------
# probes and the free oracle

def random_band_limited_field(rng: np.random.Generator, A: FluxField, k_band: int = 8,
                              n_r: int = 144, n_theta: int = 32, r_max: float = 80.0,
                              sigma: float = 7.0) -> PolarField:
    """sum_{|k| <= k_band} a_k e_k(r) phi_k(theta) with Gaussian envelopes e_k.

    e_k(r) = (r^2 / (r^2 + sigma^2))^{nu_k / 2} (G(r - c_k) + G(r + c_k)) / 2
    with G(x) = exp(-x^2 / (2 sigma^2)). The factor r^{nu_k} h(r^2) makes
    each mode smooth at the origin, so its Hankel spectrum decays
    exponentially. Complex normal a_k and centres c_k uniform in
    [2 sigma, 4 sigma].
    """
    from .spectrum import eigenfunction, radial_grid

    r, w = radial_grid(n_r, r_max)
    th = TWO_PI * np.arange(n_theta) / n_theta
    ks = np.arange(-k_band, k_band + 1)
    amp = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
    centre = rng.uniform(2.0 * sigma, 4.0 * sigma, ks.size)
    nu = np.abs(ks + A.flux)
    rr, cc = r[:, None], centre[None, :]
    bump = 0.5 * (np.exp(-((rr - cc) ** 2) / (2.0 * sigma ** 2)) + np.exp(-((rr + cc) ** 2) / (2.0 * sigma ** 2)))
    env = (rr ** 2 / (rr ** 2 + sigma ** 2)) ** (nu[None, :] / 2) * bump * amp
    phis = eigenfunction(th[None, :], ks[:, None], A)
    return PolarField(r, w, env @ phis, r_max)


def operator_norm_probe(kind: str, t: float, p, trials: int = 4, seed: int = 0,
                        A: FluxField | None = None, w=None, path: str = "closed-form-kernel",
                        field_kwargs: dict | None = None):
    """max over seeded random fields of ||Op g||_p / ||g||_p (a lower bound).

    ``p`` may be a sequence; then one value per entry is returned.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    A = FluxField.constant(0.5) if A is None else A
    ps = np.atleast_1d(np.asarray(p, dtype=float))
    rng = np.random.default_rng(seed)
    best = np.zeros(ps.size)
    for _ in range(trials):
        g = random_band_limited_field(rng, A, **(field_kwargs or {}))
        req = PropagationRequest(kind, t, A, g, path, w, k_max=(field_kwargs or {}).get("k_band", 8))
        u = apply_propagator(req)
        for i, pp in enumerate(ps):
            best[i] = max(best[i], lp_norm(u, pp) / lp_norm(g, pp))
    return float(best[0]) if np.ndim(p) == 0 else best


def free_sine_solution(t: float, r, sigma: float = 1.0) -> np.ndarray:
    """sin(t sqrt(-Delta))/sqrt(-Delta) applied to exp(-|x|^2 / (2 sigma^2)).

    Radial Hankel evolution: u(r) = sigma^2 int_0^inf sin(t rho)
    exp(-sigma^2 rho^2 / 2) J_0(r rho) drho, by adaptive quadrature.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    top = 40.0 / sigma
    out = np.empty(r.size)
    for i, x in enumerate(r):
        g = lambda rho: math.sin(t * rho) * math.exp(-0.5 * (sigma * rho) ** 2) * float(jv(0, x * rho))
        out[i] = sigma ** 2 * integrate.quad(g, 0.0, top, epsabs=1e-13, epsrel=1e-12, limit=800)[0]
    return out
