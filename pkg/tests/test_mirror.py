"""Single-mirror decay ratio: closed form vs frozen oracle values and quadrature."""

import math

import numpy as np
import pytest

from mirrorqed import (
    MirrorSpec,
    errors,
    gamma_mirror_closed,
    gamma_mirror_quadrature,
)

# (re_r, k0d, ratio) from the 50-digit mpmath closed-form oracle.
CLOSED_ORACLE = [
    (-1.0, math.pi / 2, 1.1519817754635067),
    (-1.0, math.pi, 0.9620045561341235),
    (-1.0, 10.0, 0.9301699756981392),
    (0.5, 1.0, 1.1777123694421339),
    (0.5, 100.0, 0.9967343517759755),
]

# Independent 2000x4000 sphere-trapezoid oracle value.
TRAPEZOID_ORACLE = (0.7, math.pi / 2, 0.8936127571755372)


class TestMirrorSpec:
    def test_transmission_from_unitarity(self):
        assert MirrorSpec(r=0.6).t == pytest.approx(0.8, rel=1e-15)
        assert MirrorSpec(r=0.6j).t == pytest.approx(0.8, rel=1e-15)
        assert MirrorSpec(r=1.0).t == 0.0

    def test_overunity_reflection_rejected(self):
        with pytest.raises(errors.InvalidParams):
            MirrorSpec(r=1.5)
        with pytest.raises(errors.InvalidParams):
            MirrorSpec(r=1.0 + 1e-5j)


class TestClosedForm:
    @pytest.mark.parametrize("re_r,k0d,expected", CLOSED_ORACLE)
    def test_oracle_values(self, re_r, k0d, expected):
        res = gamma_mirror_closed(re_r, k0d)
        assert res.ratio == pytest.approx(expected, abs=1e-12)
        assert res.method == "closed_form"

    def test_contact_limit_is_one_plus_re_r(self):
        for re_r in np.linspace(-1.0, 1.0, 9):
            assert gamma_mirror_closed(float(re_r), 0.0).ratio == 1.0 + re_r

    def test_far_field_returns_to_free_space(self):
        for re_r in (-1.0, 0.5, 1.0):
            assert abs(gamma_mirror_closed(re_r, 1e4).ratio - 1.0) < 3e-4

    def test_zero_reflection_is_exactly_free_space(self):
        assert gamma_mirror_closed(0.0, 2.7).ratio == 1.0

    def test_ratio_nonnegative_on_grid(self):
        k0d = np.linspace(0.0, 20.0, 401)
        for re_r in (-1.0, -0.5, 0.5, 1.0):
            ratios = np.array([gamma_mirror_closed(re_r, float(x)).ratio for x in k0d])
            assert np.all(ratios >= -1e-15)
            assert np.all(ratios <= 2.0 + 1e-15)

    def test_domain_errors(self):
        with pytest.raises(errors.InvalidParams):
            gamma_mirror_closed(1.5, 1.0)
        with pytest.raises(errors.InvalidParams):
            gamma_mirror_closed(0.5, -0.1)


class TestQuadratureRoute:
    @pytest.mark.parametrize("re_r,k0d,expected", CLOSED_ORACLE)
    def test_matches_oracle_values(self, re_r, k0d, expected):
        res = gamma_mirror_quadrature(re_r, k0d)
        assert res.ratio == pytest.approx(expected, abs=1e-9)
        assert res.method == "quadrature"

    def test_matches_independent_trapezoid_oracle(self):
        re_r, k0d, expected = TRAPEZOID_ORACLE
        res = gamma_mirror_quadrature(re_r, k0d)
        assert res.ratio == pytest.approx(expected, abs=1e-9)

    def test_error_estimate_is_conservative(self):
        for re_r in (-1.0, -0.4, 0.8):
            for k0d in (0.05, 1.0, 10.0, 50.0):
                quad = gamma_mirror_quadrature(re_r, k0d)
                closed = gamma_mirror_closed(re_r, k0d)
                gap = abs(quad.ratio - closed.ratio)
                assert gap <= quad.err_estimate + closed.err_estimate

    def test_dipole_orientation_does_not_change_inplane_result(self):
        # any orientation in the mirror plane (x = 0) gives the same ratio
        from mirrorqed import geometry

        base = gamma_mirror_quadrature(-0.8, 1.3).ratio
        tilted = gamma_mirror_quadrature(
            -0.8, 1.3, dhat=geometry.DipoleOrientation(vec=np.array([0.0, 1.0, 1.0]))
        ).ratio
        assert tilted == pytest.approx(base, abs=1e-9)
