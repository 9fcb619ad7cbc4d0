"""Poisson line process in representation coordinates, stripe potentials,
cheap-path construction, and the disk eigenvalue lambda2.

A line is (r, theta) with theta in (0, pi] and signed r: the point set
{p in R^2 : p . n(theta) = r} with unit normal n(theta) = (-sin theta, cos theta).
All geometry in this module derives from that single convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "LineRep",
    "LineProcessSample",
    "StripeParams",
    "CheapPath",
    "NoQualifyingLine",
    "normal_vector",
    "sample_lines",
    "sample_marked_lines",
    "thin_lines",
    "eval_stripe",
    "construct_cheap_path",
    "bessel_j0",
    "lambda2",
    "r0_for",
]


class LineRep(NamedTuple):
    r: float
    theta: float


def normal_vector(theta):
    return np.array([-np.sin(theta), np.cos(theta)])


@dataclass(frozen=True)
class LineProcessSample:
    r: np.ndarray
    theta: np.ndarray
    window_l: float
    kappa: float
    marks: np.ndarray | None = None
    kappa_max: float | None = None  # set when marks are present

    def __post_init__(self):
        if len(self.r) != len(self.theta):
            raise ValueError("r and theta must have equal length")
        if self.marks is not None and len(self.marks) != len(self.r):
            raise ValueError("marks must match lines")
        if len(self.r) and np.max(np.abs(self.r)) > self.window_l:
            raise ValueError("line outside window")

    @property
    def n_lines(self) -> int:
        return len(self.r)

    def as_lines(self) -> list[LineRep]:
        return [LineRep(float(r), float(t)) for r, t in zip(self.r, self.theta)]


@dataclass(frozen=True)
class StripeParams:
    c: float
    R: float
    M: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.c < 0 or self.M < 0:
            raise ValueError("c and M must be nonnegative")


def sample_lines(kappa: float, window_l: float, seed) -> LineProcessSample:
    """Poisson(kappa * 2L) lines; r ~ U[-L, L], theta ~ U(0, pi]."""
    if window_l <= 0:
        raise ValueError("window_l must be positive")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    rng = np.random.default_rng(seed)
    n = rng.poisson(kappa * 2.0 * window_l)
    r = rng.uniform(-window_l, window_l, size=n)
    theta = np.pi * (1.0 - rng.random(n))  # (0, pi]
    return LineProcessSample(r=r, theta=theta, window_l=window_l, kappa=kappa)


def sample_marked_lines(kappa_max: float, window_l: float, seed) -> LineProcessSample:
    """Extended process: lines carry marks s ~ U[0, kappa_max); thinning at any
    kappa <= kappa_max keeps lines with s < kappa."""
    if kappa_max <= 0:
        raise ValueError("kappa_max must be positive")
    if window_l <= 0:
        raise ValueError("window_l must be positive")
    rng = np.random.default_rng(seed)
    n = rng.poisson(kappa_max * 2.0 * window_l)
    r = rng.uniform(-window_l, window_l, size=n)
    theta = np.pi * (1.0 - rng.random(n))
    marks = rng.uniform(0.0, kappa_max, size=n)
    return LineProcessSample(r=r, theta=theta, window_l=window_l,
                             kappa=kappa_max, marks=marks, kappa_max=kappa_max)


def thin_lines(sample: LineProcessSample, kappa: float) -> LineProcessSample:
    """Keep exactly the lines with mark < kappa; nested in kappa."""
    if sample.marks is None:
        raise ValueError("thinning needs a marked sample")
    if kappa < 0 or kappa > sample.kappa_max:
        raise ValueError("kappa must lie in [0, kappa_max]")
    keep = sample.marks < kappa
    return LineProcessSample(r=sample.r[keep], theta=sample.theta[keep],
                             window_l=sample.window_l, kappa=kappa,
                             marks=sample.marks[keep], kappa_max=sample.kappa_max)


def line_distances(sample: LineProcessSample, points) -> np.ndarray:
    """Distance from each point (shape (m, 2) or (2,)) to each line: (m, n)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nx = -np.sin(sample.theta)
    ny = np.cos(sample.theta)
    return np.abs(pts[:, 0:1] * nx + pts[:, 1:2] * ny - sample.r)


def eval_stripe(x, sample: LineProcessSample, params: StripeParams):
    """c within distance R of some line, c + M otherwise (c + M when no lines)."""
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if sample.n_lines == 0:
        out = np.full(len(pts), params.c + params.M)
    else:
        inside = np.min(line_distances(sample, pts), axis=1) < params.R
        out = np.where(inside, params.c, params.c + params.M)
    return float(out[0]) if scalar else out


class NoQualifyingLine(Exception):
    """No line with theta in [pi - phi, pi) crosses the positive e2-axis."""


@dataclass(frozen=True)
class CheapPath:
    line: LineRep
    theta_gamma: float
    u: float
    p1: tuple[float, float]
    p2: tuple[float, float]

    @property
    def leg_lengths(self) -> tuple[float, float, float]:
        # up the e2-axis, along the line, then straight to u*e1
        h1 = self.p1[1]
        along = math.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1])
        h3 = abs(self.p2[1])
        return (h1, along, h3)


def construct_cheap_path(sample: LineProcessSample, u: float, phi: float) -> CheapPath:
    """Among lines with theta in [pi - phi, pi) crossing the positive e2-axis,
    take the one met first when walking up from the origin; p2 is its
    intersection with the vertical {u e1 + s e2}.

    |p2 - p1| = u / cos(pi - theta) by construction.
    """
    if not (0 < phi < np.pi / 2):
        raise ValueError("phi must lie in (0, pi/2)")
    if u <= 0:
        raise ValueError("u must be positive")
    best = None
    for r, theta in zip(sample.r, sample.theta):
        if not (np.pi - phi <= theta < np.pi):
            continue
        ct = np.cos(theta)  # < 0 on (pi/2, pi)
        t = r / ct  # intersection (0, t) with the e2-axis
        if t <= 0:
            continue
        if best is None or t < best[0]:
            best = (t, float(r), float(theta))
    if best is None:
        raise NoQualifyingLine(
            f"no line with theta in [pi-{phi:g}, pi) crosses the positive e2-axis")
    t, r, theta = best
    s = (r + u * np.sin(theta)) / np.cos(theta)
    return CheapPath(line=LineRep(r, theta), theta_gamma=theta, u=float(u),
                     p1=(0.0, t), p2=(float(u), float(s)))


def bessel_j0(x):
    """J0 by its power series sum (-1)^m (x^2/4)^m / (m!)^2; accurate and fast
    for the |x| <= 3 range the bisection needs."""
    x = np.asarray(x, dtype=float)
    q = x * x / 4.0
    term = np.ones_like(q)
    out = np.ones_like(q)
    for m in range(1, 40):
        term = term * (-q) / (m * m)
        out = out + term
        if np.all(np.abs(term) < 1e-18):
            break
    return out if out.ndim else float(out)


_LAMBDA2_CACHE: list[float] = []


def lambda2() -> float:
    """Principal Dirichlet eigenvalue of -(1/2) Laplacian on the unit disk:
    j_{0,1}^2 / 2, with j_{0,1} found by bisection of the J0 series."""
    if _LAMBDA2_CACHE:
        return _LAMBDA2_CACHE[0]
    lo, hi = 2.0, 3.0  # J0(2) > 0 > J0(3)
    flo = bessel_j0(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = bessel_j0(mid)
        if flo * fmid <= 0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo < 1e-12:
            break
    j01 = 0.5 * (lo + hi)
    val = j01 * j01 / 2.0
    _LAMBDA2_CACHE.append(val)
    return val


def r0_for(D: float) -> float:
    """Stripe radius threshold 4 sqrt(lambda2)/D + 1."""
    if D <= 0:
        raise ValueError("D must be positive")
    return 4.0 * math.sqrt(lambda2()) / D + 1.0
