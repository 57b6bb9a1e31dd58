import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from krmn.kernels import LINEAR, POLY2, ExplicitFeatureMap, KernelParams, eval_gaussian, map_features

finite = st.floats(-10, 10, allow_nan=False)


class TestGaussian:
    def test_zero_distance(self):
        u = np.array([0.3, -1.2, 5.0])
        assert eval_gaussian(u, u, KernelParams(0.1)) == 1.0

    def test_unit_distance_against_mpmath(self):
        mpmath.mp.dps = 50
        expected = float(mpmath.exp(mpmath.mpf("-0.1")))
        assert eval_gaussian([0.0], [1.0], KernelParams(0.1)) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(0.904837, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            u, v = rng.normal(size=(2, 4))
            assert eval_gaussian(u, v, KernelParams(0.3)) == eval_gaussian(v, u, KernelParams(0.3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            eval_gaussian([1.0, 2.0], [1.0], KernelParams())

    @pytest.mark.parametrize("h", [0.0, -1.0, float("nan")])
    def test_bad_bandwidth(self, h):
        with pytest.raises(ValueError):
            KernelParams(h)

    @given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
    def test_range(self, u, v):
        k = eval_gaussian(u, v, KernelParams(0.01))
        assert 0.0 < k <= 1.0
        assert eval_gaussian(u, u, KernelParams(0.01)) == 1.0


class TestFeatureMaps:
    def test_identity(self):
        fmap = ExplicitFeatureMap(LINEAR, 2)
        np.testing.assert_array_equal(map_features([3.0, -1.0], fmap), [3.0, -1.0])

    @pytest.mark.parametrize("kind", [LINEAR, POLY2])
    def test_zero_vector(self, kind):
        fmap = ExplicitFeatureMap(kind, 4)
        phi = map_features(np.zeros(4), fmap)
        assert phi.shape == (fmap.feature_dim,)
        assert not phi.any()

    def test_poly2_dimension(self):
        assert ExplicitFeatureMap(POLY2, 2).feature_dim == 3
        assert ExplicitFeatureMap(POLY2, 5).feature_dim == 15

    @pytest.mark.parametrize("kind", [LINEAR, POLY2])
    @pytest.mark.parametrize("dim", [1, 2, 5])
    def test_inner_product_matches_kernel(self, kind, dim):
        """phi(u).phi(v) against the brute-force kernel (u.v) or (u.v)^2."""
        fmap = ExplicitFeatureMap(kind, dim)
        rng = np.random.default_rng(7)
        for _ in range(200):
            u, v = rng.uniform(-1, 1, size=(2, dim))
            dot = sum(a * b for a, b in zip(u, v))
            brute = dot if kind == LINEAR else dot**2
            assert abs(map_features(u, fmap) @ map_features(v, fmap) - brute) < 1e-12

    def test_normalized_map_has_unit_norm(self):
        fmap = ExplicitFeatureMap(POLY2, 3, normalize=True)
        rng = np.random.default_rng(0)
        for _ in range(50):
            u, v = rng.uniform(-1, 1, size=(2, 3))
            assert np.linalg.norm(map_features(u, fmap)) == pytest.approx(1.0, abs=1e-15)
            assert map_features(u, fmap) @ map_features(v, fmap) == pytest.approx(fmap.kernel(u, v), abs=1e-12)

    def test_normalizing_zero_input_fails(self):
        with pytest.raises(ValueError, match="zero"):
            map_features(np.zeros(2), ExplicitFeatureMap(LINEAR, 2, normalize=True))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            map_features([1.0, 2.0, 3.0], ExplicitFeatureMap(POLY2, 2))

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown"):
            ExplicitFeatureMap("rff", 2)
