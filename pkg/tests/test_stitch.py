import numpy as np
import pytest

from bmtweet.errors import ConfigError, ShapeError
from bmtweet.layers import grad_check
from bmtweet.stitch import init_stitch, stitch_backward, stitch_forward


class TestInit:
    def test_identity(self):
        u = init_stitch("identity")
        assert np.array_equal(u.alpha, np.eye(2))

    def test_biased_default(self):
        u = init_stitch("biased")
        assert np.array_equal(u.alpha, np.array([[0.9, 0.1], [0.1, 0.9]]))

    def test_biased_one_zero_is_identity(self):
        u = init_stitch("biased", s=1.0, d=0.0)
        assert np.array_equal(u.alpha, np.eye(2))

    def test_per_channel(self):
        u = init_stitch("biased", width=5)
        assert u.alpha.shape == (2, 2, 5)
        assert np.all(u.alpha[0, 0] == 0.9) and np.all(u.alpha[0, 1] == 0.1)

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            init_stitch("diagonal")


class TestForward:
    def test_identity_passthrough(self):
        u = init_stitch("identity")
        x_a = np.array([[1.0, 2.0]])
        x_b = np.array([[3.0, 4.0]])
        (y_a, y_b), _ = stitch_forward(x_a, x_b, u)
        assert np.array_equal(y_a, x_a)
        assert np.array_equal(y_b, x_b)

    def test_hand_mix(self):
        u = init_stitch("biased")
        (y_a, y_b), _ = stitch_forward(np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]]), u)
        assert np.allclose(y_a, [[1.2, 2.2]], rtol=0, atol=1e-15)
        assert np.allclose(y_b, [[2.8, 3.8]], rtol=0, atol=1e-15)

    def test_affine_combination_of_equal_inputs(self):
        # Rows of alpha sum to 1, so equal inputs pass through unchanged.
        u = init_stitch("biased", s=0.75, d=0.25)
        v = np.array([[1.5, -2.0, 3.25]])
        (y_a, y_b), _ = stitch_forward(v, v.copy(), u)
        assert np.allclose(y_a, v, rtol=0, atol=1e-15)
        assert np.allclose(y_b, v, rtol=0, atol=1e-15)

    def test_width_mismatch(self):
        u = init_stitch("identity")
        with pytest.raises(ShapeError):
            stitch_forward(np.zeros((1, 2)), np.zeros((1, 3)), u)

    def test_linearity(self):
        rng = np.random.default_rng(12)
        u = init_stitch("biased", s=0.6, d=0.4)
        x_a = rng.normal(size=(3, 4))
        x_b = rng.normal(size=(3, 4))
        c = 2.0
        (y_a, y_b), _ = stitch_forward(c * x_a, c * x_b, u)
        (base_a, base_b), _ = stitch_forward(x_a, x_b, u)
        assert np.max(np.abs(y_a - c * base_a)) < 1e-12
        assert np.max(np.abs(y_b - c * base_b)) < 1e-12


class TestBackward:
    def test_zero_grads(self):
        u = init_stitch("biased")
        x = np.ones((2, 3))
        _, cache = stitch_forward(x, x + 1.0, u)
        dx_a, dx_b, d_alpha = stitch_backward(np.zeros((2, 3)), np.zeros((2, 3)), cache)
        assert not dx_a.any() and not dx_b.any() and not d_alpha.any()

    def test_identity_routing(self):
        u = init_stitch("identity")
        rng = np.random.default_rng(3)
        x_a = rng.normal(size=(2, 3))
        x_b = rng.normal(size=(2, 3))
        g_a = rng.normal(size=(2, 3))
        _, cache = stitch_forward(x_a, x_b, u)
        dx_a, dx_b, d_alpha = stitch_backward(g_a, np.zeros((2, 3)), cache)
        assert np.array_equal(dx_a, g_a)
        assert np.array_equal(dx_b, np.zeros((2, 3)))
        assert np.isclose(d_alpha[0, 1], (g_a * x_b).sum())

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(44)
        u = init_stitch("biased", s=0.8, d=0.3)
        x_a = rng.normal(size=(3, 4))
        x_b = rng.normal(size=(3, 4))
        c_a = rng.normal(size=(3, 4))
        c_b = rng.normal(size=(3, 4))

        def f():
            (y_a, y_b), cache = stitch_forward(x_a, x_b, u)
            dx_a, dx_b, d_alpha = stitch_backward(c_a, c_b, cache)
            return (y_a * c_a).sum() + (y_b * c_b).sum(), {
                "x_a": dx_a, "x_b": dx_b, "alpha": d_alpha,
            }

        err = grad_check(f, {"x_a": x_a, "x_b": x_b, "alpha": u.alpha})
        assert err < 1e-6

    def test_per_channel_gradients_match_finite_differences(self):
        rng = np.random.default_rng(45)
        u = init_stitch("biased", width=4)
        u.alpha += rng.normal(size=u.alpha.shape) * 0.1
        x_a = rng.normal(size=(3, 4))
        x_b = rng.normal(size=(3, 4))
        c_a = rng.normal(size=(3, 4))
        c_b = rng.normal(size=(3, 4))

        def f():
            (y_a, y_b), cache = stitch_forward(x_a, x_b, u)
            dx_a, dx_b, d_alpha = stitch_backward(c_a, c_b, cache)
            return (y_a * c_a).sum() + (y_b * c_b).sum(), {
                "x_a": dx_a, "x_b": dx_b, "alpha": d_alpha,
            }

        err = grad_check(f, {"x_a": x_a, "x_b": x_b, "alpha": u.alpha})
        assert err < 1e-6
