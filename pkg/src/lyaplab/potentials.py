"""Periodic potentials on the 1-d torus and their realizations.

A potential is a nonnegative function on [0,1) with certified bounds
v_min <= V <= v_max.  Realizations are shifts: V_omega(x) = V(omega + x mod 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TorusPotential",
    "Realization",
    "eval_realization",
    "mean_potential",
    "grad_realization",
    "symmetrize",
    "torus_mean",
]


@dataclass(frozen=True)
class TorusPotential:
    """One of: constant c, trigonometric polynomial, or grid samples.

    Trigonometric kind is a0 + sum_k a[k-1]*cos(2*pi*k*x) + b[k-1]*sin(2*pi*k*x).
    Grid kind is periodic linear interpolation of ``samples`` at nodes i/N.
    v_min/v_max are certified bounds: exact for constant and grid kinds,
    a0 -+ sum(|a|+|b|) for the trigonometric kind (safe, not tight).
    """

    kind: str
    c: float = 0.0
    a0: float = 0.0
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()
    samples: tuple[float, ...] = ()

    @staticmethod
    def constant(c):
        if c < 0:
            raise ValueError("potential must be nonnegative")
        return TorusPotential(kind="constant", c=float(c))

    @staticmethod
    def trig(a0, a=(), b=()):
        a = tuple(float(v) for v in a)
        b = tuple(float(v) for v in b)
        # pad to common length so k-indexing is uniform
        K = max(len(a), len(b))
        a = a + (0.0,) * (K - len(a))
        b = b + (0.0,) * (K - len(b))
        pot = TorusPotential(kind="trig", a0=float(a0), a=a, b=b)
        if pot.v_min < 0:
            raise ValueError("certified lower bound a0 - sum(|a|+|b|) is negative")
        return pot

    @staticmethod
    def grid(samples):
        samples = tuple(float(v) for v in samples)
        if len(samples) < 2:
            raise ValueError("grid potential needs at least 2 samples")
        if min(samples) < 0:
            raise ValueError("potential must be nonnegative")
        return TorusPotential(kind="grid", samples=samples)

    @property
    def v_min(self) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "trig":
            return self.a0 - sum(abs(v) for v in self.a) - sum(abs(v) for v in self.b)
        return min(self.samples)

    @property
    def v_max(self) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "trig":
            return self.a0 + sum(abs(v) for v in self.a) + sum(abs(v) for v in self.b)
        return max(self.samples)

    def __call__(self, x):
        """Evaluate at x (scalar or array), periodically."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.c), x.shape).copy() if x.ndim else np.float64(self.c)
        if self.kind == "trig":
            out = np.full_like(x, self.a0, dtype=float)
            for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
                w = 2.0 * np.pi * k
                if ak:
                    out += ak * np.cos(w * x)
                if bk:
                    out += bk * np.sin(w * x)
            return out
        s = np.asarray(self.samples)
        n = len(s)
        t = np.mod(x, 1.0) * n
        i0 = np.floor(t).astype(int) % n
        frac = t - np.floor(t)
        return (1.0 - frac) * s[i0] + frac * s[(i0 + 1) % n]

    def gradient(self, x):
        """Derivative at x.  Analytic for trig; central difference (step
        1/(2N), non-certified) for grid; zero for constant."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(x)
        if self.kind == "trig":
            out = np.zeros_like(x)
            for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
                w = 2.0 * np.pi * k
                if ak:
                    out -= ak * w * np.sin(w * x)
                if bk:
                    out += bk * w * np.cos(w * x)
            return out
        h = 1.0 / (2 * len(self.samples))
        return (self(x + h) - self(x - h)) / (2 * h)

    def scaled(self, c: float) -> "TorusPotential":
        """c*V with c >= 0; kind and certified bounds scale exactly."""
        c = float(c)
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        if self.kind == "constant":
            return TorusPotential.constant(c * self.c)
        if self.kind == "trig":
            return TorusPotential(
                kind="trig",
                a0=c * self.a0,
                a=tuple(c * v for v in self.a),
                b=tuple(c * v for v in self.b),
            )
        return TorusPotential.grid(tuple(c * v for v in self.samples))

    def shifted(self, c: float) -> "TorusPotential":
        """V + c (c may be negative as long as v_min + c >= 0)."""
        c = float(c)
        if self.v_min + c < 0:
            raise ValueError("shift makes the certified lower bound negative")
        if self.kind == "constant":
            return TorusPotential.constant(self.c + c)
        if self.kind == "trig":
            return TorusPotential(kind="trig", a0=self.a0 + c, a=self.a, b=self.b)
        return TorusPotential.grid(tuple(v + c for v in self.samples))

    def values_on_grid(self, n: int) -> np.ndarray:
        return self(np.arange(n) / n)


@dataclass(frozen=True)
class Realization:
    base: TorusPotential
    omega: float

    def __call__(self, x):
        return self.base(np.mod(self.omega + np.asarray(x, dtype=float), 1.0))


def eval_realization(V: TorusPotential, omega, x):
    """V_omega(x) = V((omega + x) mod 1)."""
    return V(np.mod(np.asarray(omega, dtype=float) + np.asarray(x, dtype=float), 1.0))


def mean_potential(V: TorusPotential) -> float:
    """E[V].  Exact for constant/trig; plain node average for grid kind
    (periodic trapezoid = rectangle rule)."""
    if V.kind == "constant":
        return V.c
    if V.kind == "trig":
        return V.a0
    return float(np.mean(V.samples))


def grad_realization(V: TorusPotential, omega, x):
    if V.kind not in ("trig", "grid", "constant"):
        raise ValueError(f"unknown kind {V.kind}")
    return V.gradient(np.mod(np.asarray(omega, dtype=float) + np.asarray(x, dtype=float), 1.0))


def symmetrize(V: TorusPotential, m: int) -> TorusPotential:
    """W(omega) = (1/m) sum_j V(omega + j/m): conditional expectation onto the
    (1/m)-periodic functions.  Mean-preserving; certified bounds tighten."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1 or V.kind == "constant":
        return V
    if V.kind == "trig":
        # averaging kills every mode whose frequency is not a multiple of m
        a = tuple(ak if (k + 1) % m == 0 else 0.0 for k, ak in enumerate(V.a))
        b = tuple(bk if (k + 1) % m == 0 else 0.0 for k, bk in enumerate(V.b))
        return TorusPotential(kind="trig", a0=V.a0, a=a, b=b)
    s = np.asarray(V.samples)
    n = len(s)
    if n % m == 0:
        w = np.mean([np.roll(s, -j * (n // m)) for j in range(m)], axis=0)
    else:
        x = np.arange(n) / n
        w = np.mean([V(x + j / m) for j in range(m)], axis=0)
    return TorusPotential(kind="grid", samples=tuple(float(v) for v in w))


def torus_mean(fn, n: int = 4096) -> float:
    """Rectangle-rule mean of fn over [0,1); spectrally accurate for smooth
    periodic integrands."""
    x = np.arange(n) / n
    return float(np.mean(fn(x)))
