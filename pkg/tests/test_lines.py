import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from lyaplab import (
    CheapPath,
    LineProcessSample,
    NoQualifyingLine,
    StripeParams,
    bessel_j0,
    construct_cheap_path,
    eval_stripe,
    lambda2,
    line_distances,
    normal_vector,
    r0_for,
    sample_lines,
    sample_marked_lines,
    thin_lines,
)

LEVEL = 0.01  # all statistical tests in this file run at this level


def single_line(r, theta, window_l=50.0):
    return LineProcessSample(r=np.array([float(r)]), theta=np.array([float(theta)]),
                             window_l=window_l, kappa=0.0)


# ---------------------------------------------------------------------------
# geometry


def test_normal_vector_convention():
    n = normal_vector(math.pi / 2)
    assert np.allclose(n, [-1.0, 0.0], atol=1e-15)
    # r >= 0 iff the line meets the positive e2-axis: line {n(theta).p = r}
    # with theta=pi is {y = -r}; it crosses {t e2, t>0} iff r < 0... the
    # convention is checked through distances instead:
    s = single_line(1.0, math.pi / 2)
    # n = (-1, 0): line {-x = 1} i.e. x = -1
    d = line_distances(s, np.array([[0.0, 0.0], [-1.0, 5.0], [2.0, 0.0]]))
    assert np.allclose(d[:, 0], [1.0, 0.0, 3.0], atol=1e-12)


def test_line_through_0_1_at_three_quarter_pi():
    # n(3pi/4) = (-sin, cos) = (-r2/2, -r2/2); through (0,1) means r = -r2/2,
    # giving the line {x + y = 1}; it meets {u e1 + s e2} at (u, 1 - u)
    r = math.cos(3 * math.pi / 4)
    s = single_line(r, 3 * math.pi / 4)
    d = line_distances(s, np.array([[0.0, 1.0], [1.0, 0.0], [3.0, -2.0], [0.0, 0.0]]))
    assert np.allclose(d[:3, 0], 0.0, atol=1e-12)
    assert abs(d[3, 0] - math.sqrt(0.5)) < 1e-12
    path = construct_cheap_path(s, 3.0, 1.0)
    assert np.allclose(path.p1, (0.0, 1.0), atol=1e-12)
    assert np.allclose(path.p2, (3.0, -2.0), atol=1e-12)


def test_cheap_path_identity_and_legs():
    s = single_line(math.cos(3 * math.pi / 4), 3 * math.pi / 4)
    u = 4.0
    p = construct_cheap_path(s, u, 1.2)
    seg = math.hypot(p.p2[0] - p.p1[0], p.p2[1] - p.p1[1])
    assert abs(seg - u / math.cos(math.pi - p.theta_gamma)) < 1e-12
    h1, along, h3 = p.leg_lengths
    assert h1 == pytest.approx(p.p1[1])
    assert along == pytest.approx(seg)
    assert h3 == pytest.approx(abs(p.p2[1]))


def test_cheap_path_picks_first_crossing():
    # two qualifying lines; the one met first walking up from the origin wins
    th = 0.9 * math.pi
    r_near = 1.0 * math.cos(th)   # crosses e2-axis at t = 1
    r_far = 3.0 * math.cos(th)    # crosses at t = 3
    s = LineProcessSample(r=np.array([r_far, r_near]),
                          theta=np.array([th, th]), window_l=50.0, kappa=0.0)
    p = construct_cheap_path(s, 2.0, 0.5)
    assert p.p1[1] == pytest.approx(1.0)
    assert p.line.r == pytest.approx(r_near)


def test_cheap_path_rejections():
    # theta outside [pi - phi, pi)
    with pytest.raises(NoQualifyingLine):
        construct_cheap_path(single_line(-0.5, 0.5 * math.pi), 2.0, 0.3)
    # qualifying angle but crossing the negative e2-axis (t <= 0)
    th = 0.95 * math.pi
    with pytest.raises(NoQualifyingLine):
        construct_cheap_path(single_line(-2.0 * math.cos(th), th), 2.0, 0.3)
    with pytest.raises(ValueError):
        construct_cheap_path(single_line(0.1, 0.9 * math.pi), -1.0, 0.3)
    with pytest.raises(ValueError):
        construct_cheap_path(single_line(0.1, 0.9 * math.pi), 2.0, 2.0)


def test_cheap_path_randomized_identity():
    rng = np.random.default_rng(17)
    built = 0
    for _ in range(200):
        theta = math.pi * (1.0 - rng.random())
        r = rng.uniform(-4, 4)
        u = rng.uniform(0.5, 8.0)
        phi = rng.uniform(0.1, 1.5)
        s = single_line(r, theta)
        qualifies = (math.pi - phi <= theta < math.pi) and r / math.cos(theta) > 0
        try:
            p = construct_cheap_path(s, u, phi)
        except NoQualifyingLine:
            assert not qualifies
            continue
        assert qualifies
        built += 1
        seg = math.hypot(p.p2[0] - p.p1[0], p.p2[1] - p.p1[1])
        assert abs(seg - u / math.cos(math.pi - p.theta_gamma)) < 1e-9
        # p2 lies on the line and on the vertical through u e1
        d = line_distances(s, np.array([list(p.p2)]))
        assert d[0, 0] < 1e-9
        assert p.p2[0] == pytest.approx(u)
    assert built > 10


def test_eval_stripe_hand_values():
    params = StripeParams(c=1.0, R=0.5, M=2.0)
    s = single_line(1.0, math.pi / 2)  # the line x = -1
    assert eval_stripe(np.array([-1.2, 3.0]), s, params) == 1.0
    assert eval_stripe(np.array([0.0, 0.0]), s, params) == 3.0
    out = eval_stripe(np.array([[-1.2, 3.0], [5.0, 5.0]]), s, params)
    assert np.allclose(out, [1.0, 3.0])
    empty = LineProcessSample(r=np.zeros(0), theta=np.zeros(0), window_l=10.0, kappa=0.0)
    assert eval_stripe(np.array([0.0, 0.0]), empty, params) == 3.0


def test_sample_validation():
    with pytest.raises(ValueError):
        LineProcessSample(r=np.array([1.0]), theta=np.array([1.0, 2.0]),
                          window_l=5.0, kappa=0.0)
    with pytest.raises(ValueError):
        LineProcessSample(r=np.array([9.0]), theta=np.array([1.0]),
                          window_l=5.0, kappa=0.0)
    with pytest.raises(ValueError):
        sample_lines(-0.1, 5.0, 1)
    with pytest.raises(ValueError):
        sample_lines(0.5, 0.0, 1)
    with pytest.raises(ValueError):
        sample_marked_lines(0.0, 5.0, 1)


# ---------------------------------------------------------------------------
# distributional checks (fixed seeds, level 0.01)


def test_sample_lines_distributions():
    L, kappa = 8.0, 0.7
    rs, thetas, counts = [], [], []
    for seed in range(400):
        s = sample_lines(kappa, L, (23, seed))
        counts.append(s.n_lines)
        rs.append(s.r)
        thetas.append(s.theta)
    rs = np.concatenate(rs)
    thetas = np.concatenate(thetas)
    assert scipy.stats.kstest(rs, scipy.stats.uniform(-L, 2 * L).cdf).pvalue > LEVEL
    assert scipy.stats.kstest(thetas, scipy.stats.uniform(0, math.pi).cdf).pvalue > LEVEL
    # Poisson counts: compare against the pmf binned to keep expected >= 5
    mean = kappa * 2 * L
    counts = np.asarray(counts)
    edges = list(range(5, 19))
    obs = np.array([(counts < 5).sum()]
                   + [(counts == k).sum() for k in edges]
                   + [(counts > 18).sum()])
    pois = scipy.stats.poisson(mean)
    exp = np.array([pois.cdf(4)] + [pois.pmf(k) for k in edges]
                   + [1 - pois.cdf(18)]) * len(counts)
    p = scipy.stats.chisquare(obs, exp).pvalue
    assert p > LEVEL


def test_marks_uniform():
    s = sample_marked_lines(2.0, 50.0, 99)
    assert s.n_lines > 100
    assert scipy.stats.kstest(s.marks, scipy.stats.uniform(0, 2.0).cdf).pvalue > LEVEL


def test_stripe_stationarity():
    # P(V(x) = c) equals P(V(0) = c) at points away from the window edge
    kappa, R, L = 0.3, 0.5, 16.0  # L >= |x| + 10 R for all probes
    params = StripeParams(1.0, R, 1.0)
    probes = np.array([[5.0, 0.0], [0.0, 5.0], [3.0, 4.0]])
    m = 4000
    at0 = np.empty(m, dtype=bool)
    atx = np.empty((len(probes), m), dtype=bool)
    for i in range(m):
        s = sample_lines(kappa, L, (31, i))
        vals = eval_stripe(np.vstack([[0.0, 0.0], probes]), s, params)
        at0[i] = vals[0] == 1.0
        atx[:, i] = vals[1:] == 1.0
    table0 = np.array([at0.sum(), m - at0.sum()])
    for j in range(len(probes)):
        tj = np.array([atx[j].sum(), m - atx[j].sum()])
        p = scipy.stats.chi2_contingency(np.vstack([table0, tj]))[1]
        assert p > LEVEL


def test_isotropy_of_nearest_line_distance():
    # distance from x to the nearest line has the same law for |x| fixed
    kappa, L = 0.4, 16.0
    q1 = np.array([[3.0, 0.0]])
    q2 = np.array([[3.0 / math.sqrt(2), 3.0 / math.sqrt(2)]])
    d1, d2 = [], []
    for i in range(600):
        s = sample_lines(kappa, L, (37, i))
        if s.n_lines == 0:
            continue
        d1.append(line_distances(s, q1).min())
        d2.append(line_distances(s, q2).min())
    assert scipy.stats.ks_2samp(d1, d2).pvalue > LEVEL


def test_origin_in_stripe_probability():
    kappa, R = 0.4, 1.0
    target = 1.0 - math.exp(-2 * kappa * R)
    m = 20000
    hits = 0
    for i in range(m):
        s = sample_lines(kappa, 12.0, (41, i))
        hits += s.n_lines > 0 and np.min(np.abs(s.r)) < R
    emp = hits / m
    se = math.sqrt(target * (1 - target) / m)
    assert abs(emp - target) <= 3 * se


def test_thinning_nested_and_consistent():
    s = sample_marked_lines(3.0, 20.0, 7)
    t0 = thin_lines(s, 0.0)
    t1 = thin_lines(s, 1.0)
    t2 = thin_lines(s, 2.0)
    t3 = thin_lines(s, 3.0)
    assert t0.n_lines == 0
    assert t3.n_lines == s.n_lines
    assert set(t1.r) <= set(t2.r)
    assert t1.kappa == 1.0
    # counts of the thinned process match the direct sampler on average
    m = 2000
    c_thin = np.mean([thin_lines(sample_marked_lines(2.0, 10.0, (43, i)), 0.8).n_lines
                      for i in range(m)])
    c_dir = np.mean([sample_lines(0.8, 10.0, (44, i)).n_lines for i in range(m)])
    se = math.sqrt(2 * 0.8 * 2 * 10.0 / m)  # two independent Poisson means
    assert abs(c_thin - c_dir) <= 3 * se
    with pytest.raises(ValueError):
        thin_lines(sample_lines(0.5, 5.0, 1), 0.3)
    with pytest.raises(ValueError):
        thin_lines(s, 4.0)


# ---------------------------------------------------------------------------
# Bessel machinery


def test_bessel_j0_vs_scipy():
    x = np.linspace(-3, 3, 301)
    assert np.max(np.abs(bessel_j0(x) - scipy.special.j0(x))) < 1e-12


def test_lambda2_value_and_residual():
    lam = lambda2()
    j01 = scipy.special.jn_zeros(0, 1)[0]
    assert abs(lam - j01 * j01 / 2.0) < 1e-10
    assert abs(lam - 2.8915929815) < 1e-9
    assert abs(bessel_j0(math.sqrt(2 * lam))) < 1e-9


def test_r0_for():
    lam = lambda2()
    assert r0_for(4 * math.sqrt(lam)) == pytest.approx(2.0)
    assert r0_for(1e9) == pytest.approx(1.0, abs=1e-6)
    assert r0_for(0.5) == pytest.approx(1.0 + 8 * math.sqrt(lam))
    with pytest.raises(ValueError):
        r0_for(0.0)
