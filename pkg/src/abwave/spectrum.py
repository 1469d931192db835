"""Angular spectrum of the magnetic operator: flux fields, eigenvalues,
eigenfunctions, angular mode decomposition and Hankel transforms.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv, roots_legendre

__all__ = [
    "FluxField",
    "PolarField",
    "total_flux",
    "eigenvalue",
    "eigenfunction",
    "angular_coefficients",
    "reconstruct",
    "hankel_transform",
    "radial_grid",
    "write_polar_field",
    "read_polar_field",
    "AliasingWarning",
    "TruncationWarning",
]

TWO_PI = 2.0 * math.pi


class AliasingWarning(UserWarning):
    """Requested modes exceed what the angular grid resolves."""


class TruncationWarning(UserWarning):
    """Radial data does not decay at the outer radius."""


@dataclass(frozen=True)
class FluxField:
    """Angular potential alpha(theta) on the unit circle.

    Use :meth:`constant` for the Aharonov-Bohm case and :meth:`tabulated`
    for samples of a smooth 2*pi-periodic alpha on a uniform grid.
    """

    kind: str
    alpha_const: float = 0.0
    theta_samples: np.ndarray | None = None
    alpha_samples: np.ndarray | None = None
    _fourier: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def constant(cls, alpha: float) -> "FluxField":
        return cls(kind="constant-AB", alpha_const=float(alpha))

    @classmethod
    def tabulated(cls, values, include_endpoint: bool = True) -> "FluxField":
        """Build from samples alpha(theta_j), theta_j uniform on [0, 2*pi].

        With ``include_endpoint`` the last sample sits at 2*pi and must
        repeat the first one to 1e-12.
        """
        v = np.asarray(values, dtype=float)
        if include_endpoint:
            if v.size < 3:
                raise ValueError("need at least 3 samples")
            if abs(v[0] - v[-1]) > 1e-12:
                raise ValueError("tabulated alpha is not 2*pi-periodic (first and last samples differ)")
            per = v[:-1]
        else:
            per = v
        n = per.size
        theta = TWO_PI * np.arange(n + 1) / n
        coef = np.fft.fft(per) / n
        return cls(kind="tabulated", alpha_const=float(coef[0].real),
                   theta_samples=theta, alpha_samples=np.append(per, per[0]), _fourier=coef)

    @classmethod
    def from_function(cls, fn, n: int = 1024) -> "FluxField":
        theta = TWO_PI * np.arange(n + 1) / n
        vals = np.asarray(fn(theta), dtype=float)
        vals[-1] = vals[0]
        return cls.tabulated(vals)

    @property
    def flux(self) -> float:
        return total_flux(self)

    @property
    def integer_part(self) -> int:
        return int(math.floor(self.flux))

    @property
    def fractional(self) -> float:
        """Flux reduced to [0, 1)."""
        a = self.flux - math.floor(self.flux)
        return 0.0 if a >= 1.0 else a

    def gauge(self, theta):
        """Periodic part of the cumulative phase: Lambda(theta) - alpha*theta."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "constant-AB":
            return np.zeros_like(theta)
        c = self._fourier
        n = c.size
        k = np.fft.fftfreq(n, d=1.0 / n)
        nz = k != 0
        kk = k[nz]
        cc = c[nz]
        ph = np.exp(1j * np.multiply.outer(theta, kk))
        out = ((ph - 1.0) @ (cc / (1j * kk))).real
        return out

    def cumulative_phase(self, theta):
        """Lambda(theta) = int_0^theta alpha."""
        theta = np.asarray(theta, dtype=float)
        return self.flux * theta + self.gauge(theta)

    def alpha(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "constant-AB":
            return np.full_like(theta, self.alpha_const)
        c = self._fourier
        n = c.size
        k = np.fft.fftfreq(n, d=1.0 / n)
        return (np.exp(1j * np.multiply.outer(theta, k)) @ c).real

    def phase_between(self, theta1, theta2):
        """exp(i int_{theta2}^{theta1} alpha)."""
        return np.exp(1j * (self.cumulative_phase(theta1) - self.cumulative_phase(theta2)))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "alpha": self.flux}
        if self.kind == "tabulated":
            d["alpha_samples"] = self.alpha_samples.tolist()
        return d


def total_flux(A: FluxField) -> float:
    """Mean of alpha over the circle (trapezoid rule on the periodic grid)."""
    if A.kind == "constant-AB":
        return A.alpha_const
    return float(np.mean(A.alpha_samples[:-1]))


def eigenvalue(k, A: FluxField):
    """nu_k = |k + alpha|."""
    return np.abs(np.asarray(k) + total_flux(A))


def eigenfunction(theta, k, A: FluxField):
    """phi_k(theta) = (2 pi)^{-1/2} exp(-i(theta (k+alpha) - Lambda(theta)))."""
    theta = np.asarray(theta, dtype=float)
    a = total_flux(A)
    lam = A.cumulative_phase(theta)
    return np.exp(-1j * (theta * (np.asarray(k) + a) - lam)) / math.sqrt(TWO_PI)


def radial_grid(n: int, r_max: float = 20.0):
    """Gauss-Legendre nodes on [0, r_max] and weights for the measure r dr."""
    x, w = roots_legendre(n)
    r = 0.5 * r_max * (x + 1.0)
    return r, 0.5 * r_max * w * r


@dataclass(frozen=True)
class PolarField:
    """Complex samples f(r_i, theta_j) on a polar quadrature grid.

    ``r_weights`` include the Jacobian r; theta nodes are 2*pi*j/n_theta.
    """

    r_nodes: np.ndarray
    r_weights: np.ndarray
    values: np.ndarray
    r_max: float | None = None

    def __post_init__(self):
        r = np.asarray(self.r_nodes, dtype=float)
        w = np.asarray(self.r_weights, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != r.size:
            raise ValueError("values must have shape (len(r_nodes), n_theta)")
        nt = v.shape[1]
        if nt < 8 or nt % 2:
            raise ValueError("n_theta must be even and >= 8")
        if np.any(np.diff(r) <= 0) or np.any(r <= 0):
            raise ValueError("r_nodes must be positive and strictly increasing")
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "r_weights", w)
        object.__setattr__(self, "values", v)

    @property
    def n_theta(self) -> int:
        return self.values.shape[1]

    @property
    def theta_nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    @classmethod
    def on_grid(cls, fn, n_r: int = 96, n_theta: int = 32, r_max: float = 20.0) -> "PolarField":
        """Sample ``fn(r, theta)`` (broadcasting) on a Gauss-Legendre x uniform grid."""
        r, w = radial_grid(n_r, r_max)
        th = TWO_PI * np.arange(n_theta) / n_theta
        vals = np.asarray(fn(r[:, None], th[None, :]), dtype=complex)
        vals = np.broadcast_to(vals, (n_r, n_theta)).copy()
        return cls(r, w, vals, r_max)

    def with_values(self, values) -> "PolarField":
        return PolarField(self.r_nodes, self.r_weights, values, self.r_max)


def angular_coefficients(f: PolarField, A: FluxField, k_max: int) -> dict[int, np.ndarray]:
    """a_k(r) = int_0^{2 pi} f(r, theta) conj(phi_k(theta)) dtheta for |k| <= k_max."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    nt = f.n_theta
    if 2 * k_max + 1 > nt:
        warnings.warn(f"2*k_max+1 = {2 * k_max + 1} exceeds n_theta = {nt}; modes alias",
                      AliasingWarning, stacklevel=2)
    th = f.theta_nodes
    ks = np.arange(-k_max, k_max + 1)
    phis = eigenfunction(th[None, :], ks[:, None], A)
    mat = f.values @ np.conj(phis).T * (TWO_PI / nt)
    return {int(k): mat[:, i] for i, k in enumerate(ks)}


def reconstruct(coeffs: dict[int, np.ndarray], theta, A: FluxField) -> np.ndarray:
    """sum_k a_k(r) phi_k(theta), shape (n_r, n_theta)."""
    theta = np.asarray(theta, dtype=float)
    ks = np.array(sorted(coeffs))
    mat = np.stack([coeffs[k] for k in ks], axis=1)
    phis = eigenfunction(theta[None, :], ks[:, None], A)
    return mat @ phis


def hankel_transform(a, r_nodes, r_weights, nu: float, rho, warn: bool = True):
    """int_0^inf J_nu(r rho) a(r) r dr on the supplied nodes.

    ``r_weights`` already include the factor r.
    """
    a = np.asarray(a)
    r = np.asarray(r_nodes, dtype=float)
    w = np.asarray(r_weights, dtype=float)
    if warn and abs(a[-1]) > 1e-12:
        warnings.warn(f"radial data at the last node is {abs(a[-1]):.2e} > 1e-12",
                      TruncationWarning, stacklevel=2)
    rho = np.asarray(rho, dtype=float)
    J = jv(nu, np.multiply.outer(rho, r))
    return J @ (w * a)


def write_polar_field(path, f: PolarField) -> None:
    """CSV rows (r, theta, re, im) plus a JSON sidecar ``path + '.json'``
    holding the radial weights and grid metadata."""
    th = f.theta_nodes
    with open(path, "w") as fh:
        fh.write("r,theta,re,im\n")
        for i, r in enumerate(f.r_nodes):
            for j, t in enumerate(th):
                v = complex(f.values[i, j])
                fh.write(f"{float(r)!r},{float(t)!r},{v.real!r},{v.imag!r}\n")
    meta = {"n_r": int(f.r_nodes.size), "n_theta": int(f.n_theta),
            "r_max": None if f.r_max is None else float(f.r_max),
            "r_weights": [float(x) for x in f.r_weights]}
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=1)


def read_polar_field(path) -> PolarField:
    """Inverse of :func:`write_polar_field`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    n_r, n_t = meta["n_r"], meta["n_theta"]
    if data.shape[0] != n_r * n_t:
        raise ValueError(f"expected {n_r * n_t} rows, found {data.shape[0]}")
    r = data[::n_t, 0]
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(n_r, n_t)
    return PolarField(r, np.asarray(meta["r_weights"]), vals, meta.get("r_max"))
