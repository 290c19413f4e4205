import json
import math

import numpy as np
import pytest
from scipy import integrate

from vbsc.errors import ConfigError, DistributionKindError, DomainError
from vbsc.state_models import (
    Atom,
    Degenerate,
    Discrete,
    MaesHybrid,
    PiecewiseConstant,
    from_config,
    mean,
    pdf,
    quantize,
    sample,
    to_config,
)
from vbsc.capacity import bsc_capacity

MAES = MaesHybrid(0.1213, 0.021)


# -- construction ------------------------------------------------------------

def test_discrete_masses_must_sum_to_one():
    with pytest.raises(DomainError):
        Discrete(((0.1, 0.5), (0.2, 0.4)))


def test_piecewise_must_integrate_to_one():
    with pytest.raises(DomainError):
        PiecewiseConstant((0.0, 0.5, 1.0), (1.0, 1.5))


def test_maes_rejects_nonpositive_lambda1():
    with pytest.raises(DomainError):
        MaesHybrid(0.0, 0.021)


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_degenerate_rejects_out_of_range(p):
    with pytest.raises(DomainError):
        Degenerate(p)


# -- pdf ----------------------------------------------------------------------

def test_degenerate_pdf_is_a_flagged_atom():
    d = pdf(Degenerate(0.1), 0.1)
    assert isinstance(d, Atom)
    assert d.p == 0.1 and d.mass == 1.0


def test_uniform_pdf_value():
    assert pdf(PiecewiseConstant.uniform(), 0.3) == 1.0


def test_discrete_pdf_is_a_kind_error():
    with pytest.raises(DistributionKindError):
        pdf(Discrete(((0.1, 0.5), (0.4, 0.5))), 0.1)


@pytest.mark.parametrize("p", [-1e-9, 1.0 + 1e-9])
def test_pdf_domain(p):
    with pytest.raises(DomainError):
        pdf(PiecewiseConstant.uniform(), p)


def test_maes_pdf_integrates_to_one():
    # integrate in u = Phi^-1(p), where the density is smooth
    lo, hi = MAES.coord_span()
    brk = [b for b in MAES.coord_breaks() if lo < b < hi]
    total, _ = integrate.quad(MAES.coord_density, lo, hi, points=brk, limit=500,
                              epsabs=1e-12, epsrel=1e-12)
    assert abs(total - 1.0) < 1e-6


def test_maes_pdf_matches_the_enrollment_mixture():
    # error density = (1-x) * [f1(x) + f1(1-x)], f1 the one-probability density
    from scipy import special, stats
    l1, l2 = MAES.lambda1, MAES.lambda2

    def f1(x):
        u = special.ndtri(x)
        return l1 * stats.norm.pdf(l1 * u + l2) / stats.norm.pdf(u)

    for x in (1e-6, 0.01, 0.2, 0.5, 0.7, 0.99):
        want = (1 - x) * (f1(x) + f1(1 - x))
        assert MAES.pdf(x) == pytest.approx(want, rel=1e-9)


def test_maes_pdf_is_nonnegative_and_has_mass_above_half():
    p = np.linspace(0.0, 1.0, 2001)
    assert np.all(MAES.pdf(p) >= 0.0)
    assert MAES.mass_above_half() > 0.01


def test_coord_derivative_matches_finite_difference():
    for d in (MAES, MAES.reflect(), MaesHybrid(0.5, -0.4)):
        u = np.linspace(-8, 8, 41)
        h = 1e-6
        fd = (d.coord_density(u + h) - d.coord_density(u - h)) / (2 * h)
        assert np.allclose(d.coord_density_derivative(u), fd, atol=1e-7)


# -- mean -----------------------------------------------------------------------

def test_mean_trivial_cases():
    assert mean(Degenerate(0.14)) == 0.14
    assert mean(Discrete(((0.1, 0.5), (0.4, 0.5)))) == pytest.approx(0.25, abs=1e-15)


def test_maes_mean_reproduces_no_csi_capacity():
    # the only published anchor for E[P] is C = 0.6961 at the mean
    assert bsc_capacity(mean(MAES)) == pytest.approx(0.6961, abs=0.002)


def test_continuous_mean_matches_direct_quadrature():
    pw = PiecewiseConstant((0.0, 0.3, 0.6, 1.0), (0.5, 2.0, 0.625))
    direct, _ = integrate.quad(lambda p: p * pw.pdf(p), 0, 1, points=[0.3, 0.6])
    assert mean(pw) == pytest.approx(direct, abs=1e-8)
    lo, hi = MAES.coord_span()
    direct, _ = integrate.quad(lambda u: MAES.from_coord(u) * MAES.coord_density(u), lo, hi,
                               points=list(MAES.coord_breaks()), limit=500, epsabs=1e-13)
    assert mean(MAES) == pytest.approx(direct, abs=1e-8)


@pytest.mark.parametrize("dist", [
    MAES,
    PiecewiseConstant((0.0, 0.3, 0.6, 1.0), (0.5, 2.0, 0.625)),
    Discrete(((0.05, 0.2), (0.3, 0.3), (0.8, 0.5))),
    Degenerate(0.27),
])
def test_reflection_mirrors_the_mean(dist):
    assert mean(dist.reflect()) == pytest.approx(1.0 - mean(dist), abs=1e-8)


def test_reflected_maes_density():
    r = MAES.reflect()
    for p in (0.01, 0.3, 0.77):
        assert r.pdf(p) == pytest.approx(MAES.pdf(1 - p), rel=1e-9)


# -- sampling -----------------------------------------------------------------

def test_sample_trivial_cases():
    assert sample(Degenerate(0.2), 0, 5).tolist() == [0.2] * 5
    assert sample(Discrete(((0.1, 1.0),)), 0, 3).tolist() == [0.1] * 3


def test_sample_is_reproducible():
    a = sample(MAES, 123, 1000)
    b = sample(MAES, 123, 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(MAES, 124, 1000))


def test_maes_sample_mean_within_three_se():
    x = sample(MAES, 2024, 10 ** 6)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - mean(MAES)) < 3 * se


def test_discrete_sample_frequencies():
    d = Discrete(((0.1, 0.25), (0.6, 0.75)))
    x = sample(d, 9, 10 ** 5)
    frac = np.mean(x == 0.6)
    assert abs(frac - 0.75) < 3 * math.sqrt(0.75 * 0.25 / x.size)


def test_sample_requires_positive_n():
    with pytest.raises(DomainError):
        sample(MAES, 0, 0)


# -- quantize -------------------------------------------------------------------

def test_quantize_degenerate():
    q = quantize(Degenerate(0.3), 16, 1e-3)
    assert len(q) == 1
    iv = q.intervals[0]
    assert iv.lo <= 0.3 <= iv.hi and iv.mass == 1.0


def test_quantize_atoms_at_the_ends_are_exact():
    q = quantize(Discrete(((0.0, 0.5), (1.0, 0.5))), 8, 1e-3)
    assert q.tail_mass_low == q.tail_mass_high == 0.0
    assert [iv.lo for iv in q.intervals] == [0.0, 1.0]


def test_quantize_uniform_clip_points():
    q = quantize(PiecewiseConstant.uniform(), 1000, 0.06)
    assert q.p_low == pytest.approx(0.02, abs=1e-6)
    assert q.p_high == pytest.approx(0.98, abs=1e-6)
    assert q.tail_mass_low < 0.02 and q.tail_mass_high < 0.02


@pytest.mark.parametrize("dist", [MAES, MAES.reflect(), PiecewiseConstant.uniform(0.2, 0.9)])
@pytest.mark.parametrize("spacing", ["uniform", "mass"])
def test_quantize_partition_invariants(dist, spacing):
    eps = 1e-3
    q = quantize(dist, 7, eps, spacing=spacing)
    assert abs(q.total_mass() - 1.0) < 1e-9
    assert q.tail_mass_low < eps / 3 and q.tail_mass_high < eps / 3
    edges = q.edges
    assert np.all(np.diff(edges) > 0)
    for a, b in zip(q.intervals[:-1], q.intervals[1:]):
        assert a.hi == b.lo
    for iv in q.intervals:
        assert not (iv.lo < 0.5 < iv.hi)
        assert iv.lo <= iv.rep_p <= iv.hi
        assert iv.lo <= iv.center <= iv.hi
        # rep is the endpoint with the smaller BSC capacity
        assert iv.rep_p == (iv.hi if iv.hi <= 0.5 else iv.lo)


def test_quantize_uniform_spacing_is_equidistant_apart_from_the_half_split():
    q = quantize(PiecewiseConstant.uniform(), 9, 0.03)
    e = q.edges
    e = e[~np.isclose(e, 0.5)]
    assert np.allclose(np.diff(e), np.diff(e)[0])


def test_quantized_expected_capacity_near_the_table_value():
    # bin-conditional centers; the worst endpoint is a lower bound that sits
    # ~3e-3 below at this resolution
    q = quantize(MAES, 4096, 1e-3)
    at_center = float(np.dot(q.masses, bsc_capacity(q.centers)))
    at_rep = float(np.dot(q.masses, bsc_capacity(q.rep_ps)))
    assert abs(at_center - 0.8751) < 1e-3
    assert at_rep < at_center


def test_quantize_argument_checks():
    with pytest.raises(DomainError):
        quantize(MAES, 0, 1e-3)
    with pytest.raises(DomainError):
        quantize(MAES, 8, 1.5)


def test_locate_maps_tails_to_end_intervals():
    q = quantize(PiecewiseConstant.uniform(), 4, 0.06)
    assert q.locate([0.0, 1.0]).tolist() == [0, len(q) - 1]


# -- configs ----------------------------------------------------------------------

@pytest.mark.parametrize("cfg", [
    {"kind": "maes_hybrid", "lambda1": 0.1213, "lambda2": 0.021},
    {"kind": "discrete", "points": [[0.1, 0.5], [0.4, 0.5]]},
    {"kind": "piecewise", "breakpoints": [0.0, 0.5, 1.0], "densities": [1.5, 0.5]},
    {"kind": "degenerate", "p": 0.11},
])
def test_config_round_trip(cfg):
    d = from_config(json.dumps(cfg))
    assert to_config(d) == cfg
    assert from_config(to_config(d)) == d


def test_config_from_path(tmp_path):
    f = tmp_path / "d.json"
    f.write_text('{"kind": "degenerate", "p": 0.2}')
    assert from_config(str(f)) == Degenerate(0.2)


@pytest.mark.parametrize("text, fragment", [
    ('{"kind": "degenerate", "p": 0.2, "extra": 1}', "unknown field"),
    ('{"kind": "degenerate"}', "missing field"),
    ('{"kind": "gauss"}', "field 'kind'"),
    ('{"kind": "degenerate",\n "p": }', "line 2"),
])
def test_config_errors_are_diagnosed(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        from_config(text)
