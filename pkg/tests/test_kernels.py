import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nlgs.kernels import (DispersalExp, Exponential, Gaussian,
                          TruncatedGrowingExp, UnsupportedVariant,
                          laplacian_scale, partial_mass, validate)

ALL_KERNELS = [
    Gaussian(),
    Exponential(),
    TruncatedGrowingExp(0.5, 2.0),
    DispersalExp(3.0, 5.0),
    DispersalExp(9.0, 5.0),
]


def test_eval_examples():
    assert Gaussian().eval(0.0) == 1.0
    assert DispersalExp(3.0, 5.0).eval(6.0) == 0.0
    # c * e^|z| at z = 1
    assert TruncatedGrowingExp(0.5, 2.0).eval(1.0) == pytest.approx(
        0.5 * math.e, abs=1e-12)
    assert abs(TruncatedGrowingExp(0.5, 2.0).eval(1.0) - 1.3591409) < 1e-7


def test_total_mass_closed_forms():
    assert Gaussian().total_mass() == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert Exponential().total_mass() == 2.0
    assert TruncatedGrowingExp(0.5, 2.0).total_mass() == pytest.approx(
        math.exp(2.0) - 1.0, rel=1e-15)
    assert abs(TruncatedGrowingExp(0.5, 2.0).total_mass() - 6.3890561) < 1e-7
    assert DispersalExp(3.0, 5.0).total_mass() == 1.0


def test_dispersal_normalization_constant():
    assert DispersalExp(3.0, 5.0).amplitude == pytest.approx(1.50000046, abs=1e-7)


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.label)
def test_eval_is_even(kernel):
    z = np.linspace(-3.0, 3.0, 101)
    assert np.array_equal(kernel.eval(z), kernel.eval(-z))


def test_partial_mass_examples():
    g = Gaussian()
    assert partial_mass(g, 0.0, (-np.inf, np.inf)) == pytest.approx(
        g.total_mass(), rel=1e-15)
    k = DispersalExp(3.0, 5.0)
    # support strictly inside the interval
    assert partial_mass(k, 0.0, (-20.0, 20.0)) == pytest.approx(1.0, rel=1e-12)
    # x at the right endpoint clips exactly half the support
    assert partial_mass(k, 0.0, (-10.0, 0.0)) == pytest.approx(0.5, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    x=st.floats(-4.0, 4.0),
    a=st.floats(-8.0, 8.0),
    b=st.floats(-8.0, 8.0),
    c=st.floats(-8.0, 8.0),
)
def test_partial_mass_additive_over_disjoint_intervals(x, a, b, c):
    lo, mid, hi = sorted((a, b, c))
    for kernel in ALL_KERNELS:
        whole = partial_mass(kernel, x, (lo, hi))
        split = partial_mass(kernel, x, (lo, mid)) + partial_mass(kernel, x, (mid, hi))
        assert abs(whole - split) <= 1e-12 * max(kernel.total_mass(), 1.0)


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.label)
def test_partial_mass_superset_equals_total(kernel):
    span = kernel.horizon if np.isfinite(kernel.horizon) else 60.0
    got = partial_mass(kernel, 0.3, (-2 * span - 1, 2 * span + 1))
    assert got == pytest.approx(kernel.total_mass(), rel=1e-12)


@pytest.mark.parametrize("kernel", ALL_KERNELS, ids=lambda k: k.label)
def test_second_moment_matches_quadrature(kernel):
    R = kernel.horizon if np.isfinite(kernel.horizon) else np.inf
    val, _ = quad(lambda z: z * z * kernel.eval(z), 0.0,
                  R if np.isfinite(R) else np.inf, limit=400)
    assert kernel.second_moment() == pytest.approx(2.0 * val, rel=1e-10)


def test_second_moment_closed_values():
    assert Gaussian().second_moment() == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert Exponential().second_moment() == pytest.approx(4.0, rel=1e-15)


def test_laplacian_scale_modes_agree_when_tail_underflows():
    k = DispersalExp(50.0, 5.0)
    c1 = laplacian_scale(k, "default")
    c2 = laplacian_scale(k, "moment")
    assert abs(c1 - c2) <= 1e-10 * c1


def test_laplacian_scale_large_rate_asymptote():
    # C -> a^2 (1 - e^{-aR}) -> a^2
    for a in (20.0, 50.0, 200.0):
        k = DispersalExp(a, 5.0)
        assert laplacian_scale(k) == pytest.approx(a * a, rel=1e-8)


def test_laplacian_scale_rejects_other_variants():
    with pytest.raises(UnsupportedVariant):
        laplacian_scale(Gaussian())
    with pytest.raises(ValueError):
        laplacian_scale(DispersalExp(3.0, 5.0), mode="nonsense")


def test_validate():
    assert validate(Gaussian(), use="dirichlet") == []
    assert "infinite horizon" in validate(Gaussian(), use="neumann")
    assert validate(DispersalExp(3.0, 5.0), use="dirichlet") == []
    assert validate(DispersalExp(3.0, 5.0), use="neumann") == []
    assert validate(TruncatedGrowingExp(0.5, 2.0), use="neumann") == []
    with pytest.raises(ValueError):
        validate(Gaussian(), use="periodic")
