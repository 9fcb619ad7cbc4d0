"""Variational computation of Gamma_V(y) = 2 inf_f sqrt(K(f) B(f)) on the 1-d torus.

K(f) = E[f'^2/(8f) + V f].  In d=1 the divergence-free class collapses to the
constant field, so B(f) = y^2 E[1/(2f)] and the double infimum is a single
minimization over densities.  Densities are grid values with mean exactly 1;
derivatives are central differences with periodic wrap, so the discrete
B >= y^2/2 bound (Jensen) is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import TorusPotential, torus_mean

__all__ = [
    "DensityField",
    "GammaOptions",
    "GammaResult",
    "K_functional",
    "B_functional",
    "H_functional",
    "gamma",
    "gamma_upper_fp",
    "fp_scan",
    "cov_V_lnV",
    "psi_fp",
]


@dataclass(frozen=True)
class DensityField:
    """Positive grid density with mean 1; c_f is its minimum (positivity floor)."""

    values: np.ndarray
    c_f: float

    @staticmethod
    def from_values(raw) -> "DensityField":
        v = np.asarray(raw, dtype=float)
        if v.ndim != 1 or len(v) < 4:
            raise ValueError("density needs a 1-d array of at least 4 values")
        if np.min(v) <= 0:
            raise ValueError("density must be strictly positive")
        v = v / np.mean(v)
        return DensityField(values=v, c_f=float(np.min(v)))

    @staticmethod
    def uniform(n: int) -> "DensityField":
        return DensityField(values=np.ones(n), c_f=1.0)

    @property
    def n(self) -> int:
        return len(self.values)


def _dx_central(f: np.ndarray) -> np.ndarray:
    # periodic central difference at grid scale
    n = len(f)
    return (np.roll(f, -1) - np.roll(f, 1)) * (n / 2.0)


def K_functional(f: DensityField, V: TorusPotential) -> float:
    """E[f'^2/(8f) + V f], rectangle rule on f's grid."""
    vals = f.values
    Vg = V.values_on_grid(f.n)
    df = _dx_central(vals)
    return float(np.mean(df * df / (8.0 * vals) + Vg * vals))


def B_functional(f: DensityField, y: float) -> float:
    """y^2 E[1/(2f)]; >= y^2/2 by Jensen, exactly so on the grid."""
    return float(y * y * np.mean(1.0 / (2.0 * f.values)))


def H_functional(f: DensityField, eta: float) -> float:
    """inf_w E[(w' - eta)^2 f] = eta^2 / E[1/f] (minimizer w' = eta - eta/(f E[1/f]))."""
    return float(eta * eta / np.mean(1.0 / f.values))


@dataclass(frozen=True)
class GammaOptions:
    grid_n: int = 512
    max_iter: int = 5000
    tol: float = 1e-10
    restarts: tuple[str, ...] = ("uniform", "fp")
    p_scan: tuple[float, ...] = tuple(np.linspace(0.0, 1.0, 21))
    init: np.ndarray | None = None  # optional warm-start density values


@dataclass(frozen=True)
class GammaResult:
    gamma: float
    K_value: float
    B_value: float
    sigma_s0: float  # smallest K seen over the whole run
    minimizer: DensityField
    iterations: int
    converged: bool
    grid_N: int

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "K_value": self.K_value,
            "B_value": self.B_value,
            "sigma_s0": self.sigma_s0,
            "minimizer": [float(v) for v in self.minimizer.values],
            "c_f": self.minimizer.c_f,
            "iterations": self.iterations,
            "converged": self.converged,
            "grid_N": self.grid_N,
        }


class _Objective:
    """K(f)*B(f) and its gradient in the unconstrained g-coordinates,
    f = exp(g)/mean(exp(g))."""

    def __init__(self, Vg: np.ndarray, y: float):
        self.Vg = Vg
        self.y2 = y * y
        self.n = len(Vg)

    def split(self, g):
        e = np.exp(g - np.max(g))
        f = e / np.mean(e)
        df = _dx_central(f)
        K = np.mean(df * df / (8.0 * f) + self.Vg * f)
        B = self.y2 * np.mean(1.0 / (2.0 * f))
        return K, B, f, df

    def value_grad(self, g):
        n = self.n
        K, B, f, df = self.split(g)
        # dK/df_i: direct term plus the two neighbours seeing f_i through df
        dK = (self.Vg - df * df / (8.0 * f * f)) / n
        dK += 0.5 * (np.roll(df, 1) / (4.0 * np.roll(f, 1)) - np.roll(df, -1) / (4.0 * np.roll(f, -1)))
        dB = -self.y2 / (2.0 * f * f) / n
        dP = B * dK + K * dB
        # chain rule through the normalization of f
        grad = f * dP - (f / n) * np.sum(f * dP)
        return K * B, grad


def _precond_direction(grad: np.ndarray) -> np.ndarray:
    # fixed spectral metric 1 + (2 pi k)^2/4: the leading Hessian of the
    # gradient term of K at f=1; without it descent stalls at large N
    n = len(grad)
    k = np.fft.rfftfreq(n, d=1.0 / n)
    return -np.fft.irfft(np.fft.rfft(grad) / (1.0 + (2.0 * np.pi * k) ** 2 / 4.0), n=n)


def _descend(obj: _Objective, g0: np.ndarray, max_iter: int, tol: float):
    """Preconditioned gradient descent with Armijo backtracking.
    Returns (g, value, iterations, converged, min_K_seen)."""
    g = np.array(g0, dtype=float)
    val, grad = obj.value_grad(g)
    min_K = obj.split(g)[0]
    step = 1.0
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        d = _precond_direction(grad)
        slope = float(np.dot(grad, d))
        if slope >= 0:  # numerical loss of descent; stop
            converged = True
            break
        s = step
        new_val, new_grad = val, grad
        ok = False
        for _ in range(60):
            cand = g + s * d
            v2, g2 = obj.value_grad(cand)
            if v2 <= val + 1e-4 * s * slope:
                new_val, new_grad, g = v2, g2, cand
                ok = True
                break
            s *= 0.5
        if not ok:
            converged = True  # line search exhausted at machine scale
            break
        min_K = min(min_K, obj.split(g)[0])
        rel = (val - new_val) / max(abs(val), 1e-300)
        val, grad = new_val, new_grad
        step = min(s * 2.0, 1024.0)
        if rel < tol:
            converged = True
            break
    return g, val, it, converged, min_K


def _fp_density(Vg: np.ndarray, p: float) -> np.ndarray:
    w = Vg ** (-p)
    return w / np.mean(w)


def gamma(V: TorusPotential, y: float, opts: GammaOptions | None = None) -> GammaResult:
    """Minimize 4 K(f) B(f); reports the best feasible value (an upper bound).

    Restarts from f=1 and from the best member of the f_p = V^-p family; an
    explicit opts.init warm start is used as an extra candidate.
    """
    opts = opts or GammaOptions()
    n = opts.grid_n
    Vg = V.values_on_grid(n).astype(float)
    if np.min(Vg) < 0:
        raise ValueError("potential must be nonnegative")

    if y == 0:
        f = DensityField.uniform(n)
        K = K_functional(f, V)
        return GammaResult(gamma=0.0, K_value=K, B_value=0.0, sigma_s0=K,
                           minimizer=f, iterations=0, converged=True, grid_N=n)

    obj = _Objective(Vg, y)
    starts: list[np.ndarray] = []
    if "uniform" in opts.restarts:
        starts.append(np.zeros(n))
    if "fp" in opts.restarts and np.min(Vg) > 0:
        # pick p minimizing the resulting objective among the scan values
        best_p, best_v = 0.0, np.inf
        for p in opts.p_scan:
            K, B, _, _ = obj.split(np.log(_fp_density(Vg, p)))
            if K * B < best_v:
                best_v, best_p = K * B, p
        if best_p > 0:
            starts.append(np.log(_fp_density(Vg, best_p)))
    if opts.init is not None:
        iv = opts.init.values if isinstance(opts.init, DensityField) else opts.init
        iv = np.asarray(iv, dtype=float)
        if len(iv) != n:
            raise ValueError("init density length must equal grid_n")
        if np.min(iv) <= 0:
            raise ValueError("init density must be positive")
        starts.append(np.log(iv))
    if not starts:
        starts.append(np.zeros(n))

    best = None
    total_it = 0
    sigma = np.inf
    any_conv = False
    for g0 in starts:
        g, val, it, conv, minK = _descend(obj, g0, opts.max_iter, opts.tol)
        total_it += it
        sigma = min(sigma, minK)
        any_conv = any_conv or conv
        if best is None or val < best[1]:
            best = (g, val, conv)
    g, val, conv = best
    K, B, f, _ = obj.split(g)
    field = DensityField(values=f, c_f=float(np.min(f)))
    return GammaResult(
        gamma=float(2.0 * np.sqrt(max(K * B, 0.0))),
        K_value=float(K),
        B_value=float(B),
        sigma_s0=float(sigma),
        minimizer=field,
        iterations=total_it,
        converged=bool(conv),
        grid_N=n,
    )


def gamma_upper_fp(V: TorusPotential, y: float, p: float, n_quad: int = 4096) -> float:
    """Upper bound from the trial density f_p proportional to V^-p:
    sqrt(2 y^2 E[p^2 |V'|^2/(8 V^(p+2)) + V^(1-p)] E[V^p]).

    At p=0 this is sqrt(2 E[V]) |y|.  Needs v_min > 0.  |V'|^2 is analytic
    for the trig kind, zero for constant, and the exact a.e. piecewise slope
    for the grid kind (central differences would underestimate the energy at
    kinks and break the upper-bound property); quadrature at midpoints keeps
    the grid-kind points off the kinks.
    """
    if V.v_min <= 0:
        raise ValueError("f_p bound needs v_min > 0")
    if p < 0:
        raise ValueError("p must be >= 0")
    x = (np.arange(n_quad) + 0.5) / n_quad
    Vv = V(x)
    if p == 0:
        return float(np.sqrt(2.0 * y * y * np.mean(Vv)))
    if V.kind == "grid":
        s = np.asarray(V.samples)
        n = len(s)
        slope = (np.roll(s, -1) - s) * n
        dV = slope[np.floor(np.mod(x, 1.0) * n).astype(int)]
    else:
        dV = V.gradient(x)
    first = np.mean(p * p * dV * dV / (8.0 * Vv ** (p + 2)) + Vv ** (1.0 - p))
    return float(np.sqrt(2.0 * y * y * first * np.mean(Vv ** p)))


def fp_scan(V: TorusPotential, y: float, ps, n_quad: int = 4096) -> np.ndarray:
    return np.array([gamma_upper_fp(V, y, p, n_quad) for p in ps])


def cov_V_lnV(V: TorusPotential, n_quad: int = 4096) -> float:
    """Cov(V, ln V) = E[V ln V] - E[V] E[ln V]; positive for nonconstant V."""
    if V.v_min <= 0:
        raise ValueError("needs v_min > 0")
    x = np.arange(n_quad) / n_quad
    Vv = V(x)
    return float(np.mean(Vv * np.log(Vv)) - np.mean(Vv) * np.mean(np.log(Vv)))


def psi_fp(V: TorusPotential, p: float, n_quad: int = 4096) -> float:
    """psi(p) = E[V^(1-p)] E[V^p]; psi'(0) = -Cov(V, ln V)."""
    x = np.arange(n_quad) / n_quad
    Vv = V(x)
    return float(np.mean(Vv ** (1.0 - p)) * np.mean(Vv ** p))
