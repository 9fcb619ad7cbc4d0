"""Feynman-Kac Monte Carlo travel costs a(u, V, omega) and slope regression.

Euler-Maruyama paths from the origin with soft killing: each path carries the
weight exp(-sum V(Z_t) dt) until it first enters the target ball or the horizon
t_max is reached (truncated paths keep their accumulated weight; this biases
the expectation up, hence a_hat down, by at most e^(-v_min*t_max)).

Determinism contract: paths are partitioned into fixed-size blocks; block b
draws from a counter-based Philox stream keyed by (seed, b), so results are
bit-identical however blocks are scheduled.  Trajectories never depend on the
potential, only on (seed, config), which makes the common-random-number
monotonicity V1 <= V2 => a_hat(V1) <= a_hat(V2) hold path by path, exactly.
Final weights are reduced with numpy's pairwise summation in path order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lines import LineProcessSample, StripeParams
from .potentials import TorusPotential

__all__ = [
    "McConfig",
    "TravelCostEstimate",
    "AlphaEstimate",
    "ConstantField",
    "TorusField",
    "StripeField",
    "simulate_travel_cost",
    "estimate_alpha",
    "travel_cost_in_stripe",
    "travel_costs_in_stripe",
]

_BLOCK = 32768   # paths per RNG block (fixed: part of the reproducibility envelope)
_CHUNK = 256     # time steps processed per vectorized slice


@dataclass(frozen=True)
class McConfig:
    dt: float
    n_paths: int
    t_max: float
    seed: int
    y: float = 1.0
    u_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        ug = tuple(self.u_grid)
        if any(b <= a for a, b in zip(ug, ug[1:])):
            raise ValueError("u_grid must be strictly increasing")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class TravelCostEstimate:
    u: float
    a_hat: float
    stderr_a: float
    n_effective: int
    truncated_fraction: float
    usable: bool = True
    note: str = ""


@dataclass(frozen=True)
class AlphaEstimate:
    slope: float
    stderr: float
    intercept: float
    estimates: tuple[TravelCostEstimate, ...]


# ---------------------------------------------------------------------------
# evaluatable fields on R^d


class ConstantField:
    def __init__(self, value: float, dim: int = 1):
        if value < 0:
            raise ValueError("potential must be nonnegative")
        self.value = float(value)
        self.dim = int(dim)
        self.is_constant = True

    def __call__(self, x):
        x = np.asarray(x)
        lead = x.shape[:-1] if self.dim == 2 else x.shape
        return np.full(lead, self.value, dtype=np.float32)


class TorusField:
    """Realization of a torus potential on the line: x -> V(omega + x mod 1)."""

    def __init__(self, potential: TorusPotential, omega: float = 0.0):
        self.potential = potential
        self.omega = float(omega)
        self.dim = 1
        self.is_constant = potential.kind == "constant"

    def __call__(self, x):
        pos = np.mod(np.asarray(x, dtype=np.float64) + self.omega, 1.0)
        return self.potential(pos)


class StripeField:
    """Stripe potential of a line sample: c within distance R of a line,
    c + M outside.  Valid only for |p| <= max_query_radius = L - 10R, which
    bounds the truncation bias of the finite window; asserted on every call."""

    def __init__(self, params: StripeParams, sample: LineProcessSample):
        self.params = params
        self.sample = sample
        self.dim = 2
        # M=0 degenerates to V=c everywhere; an empty sample to V=c+M everywhere
        self.is_constant = params.M == 0 or sample.n_lines == 0
        self.max_query_radius = sample.window_l - 10.0 * params.R
        if self.max_query_radius <= 0:
            raise ValueError("window too small: need window_l > 10 R")
        # lines farther than max_query_radius + R can never be within R of a
        # valid query point; dropping them is exact, not an approximation
        keep = np.abs(sample.r) <= self.max_query_radius + params.R
        self._nx = (-np.sin(sample.theta[keep])).astype(np.float64)
        self._ny = (np.cos(sample.theta[keep])).astype(np.float64)
        self._r = sample.r[keep].astype(np.float64)

    def __call__(self, pts):
        pts = np.asarray(pts)
        flat = pts.reshape(-1, 2).astype(np.float64)
        if len(flat):
            rad2 = np.max(flat[:, 0] ** 2 + flat[:, 1] ** 2)
            if rad2 > self.max_query_radius ** 2:
                raise ValueError(
                    f"query at radius {math.sqrt(rad2):.1f} outside valid window "
                    f"(max {self.max_query_radius:.1f}); enlarge window_l")
        inside = np.zeros(len(flat), dtype=bool)
        for nx, ny, r in zip(self._nx, self._ny, self._r):
            d = np.abs(flat[:, 0] * nx + flat[:, 1] * ny - r)
            inside |= d < self.params.R
        out = np.where(inside, self.params.c, self.params.c + self.params.M)
        return out.reshape(pts.shape[:-1]).astype(np.float32)


# ---------------------------------------------------------------------------
# engine


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), int(block)))))


def _simulate_1d(field, cfg: McConfig, levels: np.ndarray):
    """Paths on R from 0; per target level l (ascending) record the log-weight
    at the first step with running max >= l."""
    n = cfg.n_paths
    k = len(levels)
    dt32 = np.float32(cfg.dt)
    sq = np.float32(math.sqrt(cfg.dt))
    const = field.is_constant
    cval = np.float32(field(np.zeros(1))[0]) if const else None

    logw_hit = np.full((n, k), np.nan, dtype=np.float32)
    logw_final = np.zeros(n, dtype=np.float32)

    for b0 in range(0, n, _BLOCK):
        nb = min(_BLOCK, n - b0)
        rng = _block_rng(cfg.seed, b0 // _BLOCK)
        pos = np.zeros(nb, dtype=np.float32)
        logw = np.zeros(nb, dtype=np.float32)
        vpos = None if const else field(pos).astype(np.float32)
        alive = np.arange(nb)
        steps_done = 0
        while len(alive) and steps_done < cfg.n_steps:
            S = min(_CHUNK, cfg.n_steps - steps_done)
            na = len(alive)
            xi = rng.standard_normal((S, na), dtype=np.float32)
            xi *= sq
            np.cumsum(xi, axis=0, out=xi)
            traj = xi
            traj += pos[alive]
            runmax = np.maximum.accumulate(traj, axis=0)
            if const:
                cumv = None
            else:
                vtraj = field(traj).astype(np.float32)
                cumv = np.empty((S, na), dtype=np.float32)
                cumv[0] = vpos[alive]
                if S > 1:
                    np.cumsum(vtraj[:-1], axis=0, out=cumv[1:])
                    cumv[1:] += vpos[alive]
                cumv *= dt32
            cols = np.arange(na)
            for ti in range(k):
                open_t = np.isnan(logw_hit[b0 + alive, ti])
                if not open_t.any():
                    continue
                crossed = runmax[-1] >= levels[ti]
                rec = open_t & crossed
                if not rec.any():
                    continue
                idx = (runmax >= levels[ti]).argmax(axis=0)
                if const:
                    w_at = logw[alive] - cval * dt32 * (idx + 1).astype(np.float32)
                else:
                    w_at = logw[alive] - cumv[idx, cols]
                logw_hit[b0 + alive[rec], ti] = w_at[rec]
            pos[alive] = traj[-1]
            if const:
                logw[alive] = logw[alive] - cval * dt32 * np.float32(S)
            else:
                logw[alive] = logw[alive] - cumv[-1]
                vpos[alive] = vtraj[-1]
            # a path is done once its running max passed the last level
            done = ~np.isnan(logw_hit[b0 + alive, k - 1])
            alive = alive[~done]
            steps_done += S
        logw_final[b0:b0 + nb] = logw
    return logw_hit, logw_final


def _simulate_2d(field, cfg: McConfig, centers_x: np.ndarray, radii: np.ndarray,
                 stripe_R: float | None = None, weight_c: float | None = None,
                 freeze_radius: float | None = None):
    """Planar paths from 0; targets are balls B_radii[i]((centers_x[i], 0)).

    stripe_R: hard kill at |x2| >= stripe_R (weight-0 semantics, Lemma-5.2 style);
    weight_c: constant killing rate override (used with stripe_R);
    freeze_radius: stop paths (truncation semantics) leaving this radius, so
    windowed fields are never queried outside their valid region.
    """
    n = cfg.n_paths
    k = len(centers_x)
    dt32 = np.float32(cfg.dt)
    sq = np.float32(math.sqrt(cfg.dt))
    const = field.is_constant if weight_c is None else True
    if weight_c is not None:
        cval = np.float32(weight_c)
    elif const:
        cval = np.float32(field(np.zeros((1, 2)))[0])
    else:
        cval = None
    r2 = (radii * radii).astype(np.float32)

    logw_hit = np.full((n, k), np.nan, dtype=np.float32)
    logw_final = np.zeros(n, dtype=np.float32)
    killed = np.zeros(n, dtype=bool)

    fr2 = None if freeze_radius is None else np.float32(freeze_radius ** 2)

    for b0 in range(0, n, _BLOCK):
        nb = min(_BLOCK, n - b0)
        rng = _block_rng(cfg.seed, b0 // _BLOCK)
        pos = np.zeros((nb, 2), dtype=np.float32)
        logw = np.zeros(nb, dtype=np.float32)
        vpos = None if const else field(pos).astype(np.float32)
        alive = np.arange(nb)
        steps_done = 0
        while len(alive) and steps_done < cfg.n_steps:
            S = min(_CHUNK, cfg.n_steps - steps_done)
            na = len(alive)
            xi = rng.standard_normal((S, na, 2), dtype=np.float32)
            xi *= sq
            np.cumsum(xi, axis=0, out=xi)
            tx = xi[:, :, 0] + pos[alive, 0]
            ty = xi[:, :, 1] + pos[alive, 1]
            if const:
                cumv = None
            else:
                pts = np.stack([tx, ty], axis=-1)
                vtraj = field(pts).astype(np.float32)
                cumv = np.empty((S, na), dtype=np.float32)
                cumv[0] = vpos[alive]
                if S > 1:
                    np.cumsum(vtraj[:-1], axis=0, out=cumv[1:])
                    cumv[1:] += vpos[alive]
                cumv *= dt32
            # first kill index (stripe exit), S if never
            if stripe_R is not None:
                dead_mask = np.abs(ty) >= np.float32(stripe_R)
                dead_any = dead_mask.any(axis=0)
                dead_idx = np.where(dead_any, dead_mask.argmax(axis=0), S)
            else:
                dead_idx = np.full(na, S)
            cols = np.arange(na)
            for ti in range(k):
                open_t = np.isnan(logw_hit[b0 + alive, ti])
                if not open_t.any():
                    continue
                dx = tx - np.float32(centers_x[ti])
                inside = dx * dx + ty * ty <= r2[ti]
                hit_any = inside.any(axis=0)
                idx = inside.argmax(axis=0)
                rec = open_t & hit_any & (idx < dead_idx)
                if not rec.any():
                    continue
                if const:
                    w_at = logw[alive] - cval * dt32 * (idx + 1).astype(np.float32)
                else:
                    w_at = logw[alive] - cumv[idx, cols]
                logw_hit[b0 + alive[rec], ti] = w_at[rec]
            pos[alive, 0] = tx[-1]
            pos[alive, 1] = ty[-1]
            if const:
                logw[alive] = logw[alive] - cval * dt32 * np.float32(S)
            else:
                logw[alive] = logw[alive] - cumv[-1]
                vpos[alive] = vtraj[-1]
            newly_dead = dead_idx < S
            if newly_dead.any():
                killed[b0 + alive[newly_dead]] = True
            done = ~np.isnan(logw_hit[b0 + alive]).any(axis=1) | newly_dead
            if fr2 is not None:
                done |= pos[alive, 0] ** 2 + pos[alive, 1] ** 2 > fr2
            alive = alive[~done]
            steps_done += S
        logw_final[b0:b0 + nb] = logw
    return logw_hit, logw_final, killed


def _assemble_soft(u, logw_hit_col, logw_final):
    """Soft-killing estimate: truncated paths keep their weight."""
    hit = ~np.isnan(logw_hit_col)
    logw = np.where(hit, logw_hit_col, logw_final)
    w = np.exp(logw.astype(np.float64))
    n = len(w)
    mean = float(np.sum(w) / n)  # pairwise, fixed path order
    trunc = float(np.mean(~hit))
    if mean <= 0.0 or not np.isfinite(mean):
        return TravelCostEstimate(u=u, a_hat=math.inf, stderr_a=math.inf,
                                  n_effective=int(hit.sum()), truncated_fraction=trunc,
                                  usable=False, note="mean weight underflow; increase n_paths or lower u")
    se = float(np.std(w, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    usable = trunc < 1.0
    note = "" if usable else "all paths truncated; increase t_max"
    return TravelCostEstimate(u=u, a_hat=float(-math.log(mean)), stderr_a=se / mean,
                              n_effective=int(hit.sum()), truncated_fraction=trunc,
                              usable=usable, note=note)


def _assemble_killed(u, logw_hit_col, n):
    """Hard-kill estimate: only successful paths contribute, others weigh 0."""
    hit = ~np.isnan(logw_hit_col)
    w = np.zeros(n, dtype=np.float64)
    w[hit] = np.exp(logw_hit_col[hit].astype(np.float64))
    mean = float(np.sum(w) / n)
    n_eff = int(hit.sum())
    if n_eff == 0:
        return TravelCostEstimate(u=u, a_hat=math.inf, stderr_a=math.inf,
                                  n_effective=0, truncated_fraction=1.0,
                                  usable=False, note="no path reached the target inside the stripe")
    se = float(np.std(w, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return TravelCostEstimate(u=u, a_hat=float(-math.log(mean)), stderr_a=se / mean,
                              n_effective=n_eff, truncated_fraction=float(np.mean(~hit)))


def _mirrored(field, y: float):
    """1-d fields are evaluated along the ray direction y in {+1, -1}."""
    if y == 1.0 or field.is_constant:
        return field
    class _Flip:
        dim = 1
        is_constant = False
        def __call__(self, x):
            return field(-np.asarray(x))
    return _Flip()


def _check_y(cfg: McConfig, dim: int):
    if dim == 1:
        if abs(cfg.y) != 1.0:
            raise ValueError("y must be a unit direction (+1 or -1) in d=1")
    else:
        if cfg.y != 1.0:
            raise ValueError("planar runs are implemented for y = e1 only")


def _freeze_radius(field, u_max: float):
    """Stop-and-truncate radius for windowed fields.  The 8-unit margin bounds
    the within-chunk excursion past the chunk-end check (P ~ exp(-32/(S dt)))
    so the field is never queried outside its valid window."""
    mqr = getattr(field, "max_query_radius", None)
    if mqr is None:
        return None
    fr = mqr - 8.0
    if fr <= u_max + 1.0:
        raise ValueError("window too small for requested u; enlarge window_l")
    return fr


def simulate_travel_cost(V_realization, u: float, cfg: McConfig) -> TravelCostEstimate:
    """a(u) = -ln mean exp(-sum V(Z) dt) until first entry into B_1(u y)."""
    if u <= 1.0:
        raise ValueError("u must exceed the unit target radius")
    dim = V_realization.dim
    _check_y(cfg, dim)
    if dim == 1:
        f = _mirrored(V_realization, cfg.y)
        logw_hit, logw_final = _simulate_1d(f, cfg, np.array([u - 1.0]))
    else:
        logw_hit, logw_final, _ = _simulate_2d(
            V_realization, cfg, np.array([u]), np.array([1.0]),
            freeze_radius=_freeze_radius(V_realization, u))
    return _assemble_soft(u, logw_hit[:, 0], logw_final)


def _travel_costs(V_realization, us, cfg: McConfig) -> list[TravelCostEstimate]:
    us = np.asarray(sorted(us), dtype=float)
    if us[0] <= 1.0:
        raise ValueError("u must exceed the unit target radius")
    dim = V_realization.dim
    _check_y(cfg, dim)
    if dim == 1:
        f = _mirrored(V_realization, cfg.y)
        logw_hit, logw_final = _simulate_1d(f, cfg, us - 1.0)
    else:
        logw_hit, logw_final, _ = _simulate_2d(
            V_realization, cfg, us, np.ones_like(us),
            freeze_radius=_freeze_radius(V_realization, us[-1]))
    return [_assemble_soft(u, logw_hit[:, i], logw_final) for i, u in enumerate(us)]


def estimate_alpha(V_realization, cfg: McConfig) -> AlphaEstimate:
    """Weighted least-squares slope of a_hat against u over cfg.u_grid
    (free intercept; weights 1/stderr^2); the slope estimates the exponent."""
    if len(cfg.u_grid) < 3:
        raise ValueError("need at least 3 u points")
    ests = _travel_costs(V_realization, cfg.u_grid, cfg)
    usable = [e for e in ests if e.usable and np.isfinite(e.a_hat)]
    if len(usable) < 3:
        raise ValueError("fewer than 3 usable travel-cost points")
    u = np.array([e.u for e in usable])
    a = np.array([e.a_hat for e in usable])
    se = np.array([max(e.stderr_a, 1e-12) for e in usable])
    w = 1.0 / (se * se)
    sw = w.sum()
    ubar = float((w * u).sum() / sw)
    abar = float((w * a).sum() / sw)
    sxx = float((w * (u - ubar) ** 2).sum())
    slope = float((w * (u - ubar) * (a - abar)).sum() / sxx)
    intercept = abar - slope * ubar
    stderr = math.sqrt(1.0 / sxx)
    return AlphaEstimate(slope=slope, stderr=stderr, intercept=intercept,
                         estimates=tuple(ests))


def travel_cost_in_stripe(c: float, R: float, u: float, cfg: McConfig) -> TravelCostEstimate:
    """Mean of exp(-c H_R(u e1)) over paths reaching B_R(u e1) before leaving
    the stripe {|x2| < R}; paths that leave first contribute 0."""
    return travel_costs_in_stripe(c, R, [u], cfg)[0]


def travel_costs_in_stripe(c: float, R: float, us, cfg: McConfig) -> list[TravelCostEstimate]:
    if c < 0 or R <= 0:
        raise ValueError("need c >= 0 and R > 0")
    us = np.asarray(sorted(us), dtype=float)
    if us[0] <= R:
        raise ValueError("u must exceed R")
    _check_y(cfg, 2)
    fld = ConstantField(c, dim=2)
    logw_hit, _, _ = _simulate_2d(fld, cfg, us, np.full(len(us), R),
                                  stripe_R=R, weight_c=c)
    return [_assemble_killed(u, logw_hit[:, i], cfg.n_paths) for i, u in enumerate(us)]
