import numpy as np
import pytest

from dstlab import nn


def finite_difference_grads(net, x, grad_out, eps=1e-6):
    """Central finite differences of sum(output * grad_out) w.r.t. params."""
    def loss():
        out, _ = nn.forward(net, x)
        return float(np.sum(out * grad_out))

    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            i = it.multi_index
            old = p[i]
            p[i] = old + eps
            up = loss()
            p[i] = old - eps
            down = loss()
            p[i] = old
            g[i] = (up - down) / (2 * eps)
            it.iternext()
        grads.append(g)
    return grads


class TestForward:
    def test_identity_layer(self):
        net = nn.Mlp([3, 3], ["identity"], rng=0)
        net.weights[0] = np.eye(3)
        net.biases[0] = np.zeros(3)
        out, _ = nn.forward(net, [1.0, -2.0, 3.0])
        assert np.allclose(out[0], [1.0, -2.0, 3.0])

    def test_sigmoid_of_zero(self):
        net = nn.Mlp([4, 2], ["sigmoid"], rng=0)
        net.weights[0][:] = 0.0
        net.biases[0][:] = 0.0
        out, _ = nn.forward(net, [1.0, 2.0, 3.0, 4.0])
        assert np.allclose(out[0], 0.5)

    def test_two_layer_hand_computed(self):
        net = nn.Mlp([2, 2, 1], ["relu", "identity"], rng=0)
        net.weights[0] = np.array([[1.0, -1.0], [0.5, 2.0]])
        net.biases[0] = np.array([0.0, 1.0])
        net.weights[1] = np.array([[2.0], [3.0]])
        net.biases[1] = np.array([-1.0])
        x = np.array([1.0, 2.0])
        h = np.maximum(x @ net.weights[0] + net.biases[0], 0)
        expected = h @ net.weights[1] + net.biases[1]
        out, _ = nn.forward(net, x)
        assert np.allclose(out[0], expected)

    def test_dimension_mismatch(self):
        net = nn.Mlp([3, 2], ["identity"], rng=0)
        with pytest.raises(ValueError):
            nn.forward(net, [1.0, 2.0])


class TestBackward:
    @pytest.mark.parametrize("activation", ["relu", "tanh", "sigmoid", "identity"])
    def test_gradient_check(self, activation):
        rng = np.random.default_rng(42)
        for _ in range(10):
            sizes = [int(rng.integers(2, 8)) for _ in range(3)]
            net = nn.Mlp(sizes, [activation, activation], rng=rng)
            x = rng.normal(size=sizes[0])
            out, cache = nn.forward(net, x)
            grad_out = rng.normal(size=out.shape)
            (gw, gb), _ = nn.backward(net, cache, grad_out)
            fd = finite_difference_grads(net, x, grad_out)
            for analytic, numeric in zip(gw + gb, fd):
                denom = max(np.abs(numeric).max(), 1e-8)
                assert np.abs(analytic - numeric).max() / denom < 1e-4

    def test_zero_output_gradient(self):
        net = nn.Mlp([3, 4, 2], ["tanh", "identity"], rng=1)
        out, cache = nn.forward(net, [0.1, 0.2, 0.3])
        (gw, gb), gin = nn.backward(net, cache, np.zeros_like(out))
        assert all(np.all(g == 0) for g in gw + gb)
        assert np.all(gin == 0)

    def test_identity_layer_passes_gradient(self):
        net = nn.Mlp([3, 3], ["identity"], rng=0)
        net.weights[0] = np.eye(3)
        net.biases[0] = np.zeros(3)
        out, cache = nn.forward(net, [1.0, 2.0, 3.0])
        g = np.array([[0.5, -1.0, 2.0]])
        _, gin = nn.backward(net, cache, g)
        assert np.allclose(gin, g)


class TestOptimizers:
    def test_sgd_step(self):
        net = nn.Mlp([1, 1], ["identity"], rng=0)
        net.weights[0][:] = 0.0
        net.biases[0][:] = 0.0
        opt = nn.OptimizerState(net, "sgd", lr=0.1)
        grads = ([np.array([[1.0]])], [np.array([0.0])])
        nn.apply_gradients(net, grads, opt)
        assert net.weights[0][0, 0] == pytest.approx(-0.1)
        assert opt.step == 1

    def test_zero_gradient_no_change(self):
        net = nn.Mlp([2, 2], ["identity"], rng=3)
        before = [p.copy() for p in net.parameters()]
        opt = nn.OptimizerState(net, "sgd", lr=0.5)
        nn.apply_gradients(net, ([np.zeros((2, 2))], [np.zeros(2)]), opt)
        assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))

    def test_adam_saturates_to_lr(self):
        # with a constant gradient the adam step magnitude approaches lr
        net = nn.Mlp([1, 1], ["identity"], rng=0)
        opt = nn.OptimizerState(net, "adam", lr=0.01)
        grads = ([np.array([[3.0]])], [np.array([3.0])])
        for _ in range(500):
            nn.apply_gradients(net, grads, opt)
        last = net.weights[0][0, 0]
        nn.apply_gradients(net, grads, opt)
        assert abs((last - net.weights[0][0, 0]) - 0.01) < 1e-4

    def test_decoupled_weight_decay(self):
        # zero gradient: the only movement is the decay shrinkage
        net = nn.Mlp([1, 1], ["identity"], rng=0)
        net.weights[0][:] = 2.0
        opt = nn.OptimizerState(net, "sgd", lr=0.1, weight_decay=0.5)
        nn.apply_gradients(net, ([np.zeros((1, 1))], [np.zeros(1)]), opt)
        assert net.weights[0][0, 0] == pytest.approx(2.0 * (1 - 0.1 * 0.5))

    def test_non_finite_gradient_raises(self):
        net = nn.Mlp([1, 1], ["identity"], rng=0)
        opt = nn.OptimizerState(net, "sgd", lr=0.1)
        with pytest.raises(FloatingPointError):
            nn.apply_gradients(net, ([np.array([[np.nan]])], [np.zeros(1)]), opt)


class TestClipGradNorm:
    def test_below_threshold_untouched(self):
        grads = ([np.array([[0.3]])], [np.array([0.4])])
        norm = nn.clip_grad_norm(grads, 1.0)
        assert norm == pytest.approx(0.5)
        assert grads[0][0][0, 0] == 0.3 and grads[1][0][0] == 0.4

    def test_above_threshold_rescaled_to_max(self):
        grads = ([np.array([[3.0]])], [np.array([4.0])])
        norm = nn.clip_grad_norm(grads, 1.0)
        assert norm == pytest.approx(5.0)
        clipped = np.sqrt(grads[0][0][0, 0] ** 2 + grads[1][0][0] ** 2)
        assert clipped == pytest.approx(1.0)
        # direction preserved
        assert grads[0][0][0, 0] / grads[1][0][0] == pytest.approx(3.0 / 4.0)

    def test_none_disables_clipping(self):
        grads = ([np.array([[30.0]])], [np.array([40.0])])
        assert nn.clip_grad_norm(grads, None) == pytest.approx(50.0)
        assert grads[0][0][0, 0] == 30.0


class TestSoftUpdate:
    def test_tau_one_copies(self):
        a = nn.Mlp([2, 2], ["identity"], rng=0)
        b = nn.Mlp([2, 2], ["identity"], rng=1)
        nn.soft_update(a, b, 1.0)
        assert np.allclose(a.weights[0], b.weights[0])

    def test_tau_zero_keeps(self):
        a = nn.Mlp([2, 2], ["identity"], rng=0)
        before = a.weights[0].copy()
        b = nn.Mlp([2, 2], ["identity"], rng=1)
        nn.soft_update(a, b, 0.0)
        assert np.array_equal(a.weights[0], before)

    def test_half_blend(self):
        a = nn.Mlp([1, 1], ["identity"], rng=0)
        b = nn.Mlp([1, 1], ["identity"], rng=1)
        a.weights[0][:] = 0.0
        b.weights[0][:] = 1.0
        nn.soft_update(a, b, 0.5)
        assert a.weights[0][0, 0] == pytest.approx(0.5)

    def test_architecture_mismatch(self):
        a = nn.Mlp([2, 2], ["identity"], rng=0)
        b = nn.Mlp([2, 3], ["identity"], rng=0)
        with pytest.raises(ValueError):
            nn.soft_update(a, b, 0.5)


class TestEngineSanity:
    def test_deterministic_init(self):
        a = nn.Mlp([4, 8, 2], ["relu", "identity"], rng=7)
        b = nn.Mlp([4, 8, 2], ["relu", "identity"], rng=7)
        assert all(np.array_equal(x, y) for x, y in zip(a.parameters(), b.parameters()))

    def test_regress_x_squared(self):
        rng = np.random.default_rng(0)
        net = nn.Mlp([1, 32, 32, 1], ["tanh", "tanh", "identity"], rng=rng)
        opt = nn.OptimizerState(net, "adam", lr=1e-2)
        for step in range(5_000):
            x = rng.uniform(-1, 1, size=(32, 1))
            y = x ** 2
            out, cache = nn.forward(net, x)
            err = out - y
            mse = float(np.mean(err ** 2))
            grads, _ = nn.backward(net, cache, 2 * err / err.size)
            nn.apply_gradients(net, grads, opt)
        xs = np.linspace(-1, 1, 101)[:, None]
        out, _ = nn.forward(net, xs)
        assert float(np.mean((out - xs ** 2) ** 2)) < 1e-3

    def test_checkpoint_round_trip(self, tmp_path):
        net = nn.Mlp([3, 16, 2], ["relu", "sigmoid"], rng=5)
        opt = nn.OptimizerState(net, "adam", lr=3e-4)
        # take a step so moments are nontrivial
        out, cache = nn.forward(net, np.ones(3))
        grads, _ = nn.backward(net, cache, np.ones_like(out))
        nn.apply_gradients(net, grads, opt)
        path = tmp_path / "net.npz"
        nn.save_net(net, str(path), opt)
        net2, opt2 = nn.load_net(str(path))
        assert net2.layer_sizes == net.layer_sizes
        assert net2.activations == net.activations
        assert all(np.array_equal(a, b) for a, b in zip(net.parameters(), net2.parameters()))
        assert opt2.step == opt.step
        assert all(np.array_equal(a, b) for a, b in zip(opt.m, opt2.m))
