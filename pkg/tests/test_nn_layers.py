import numpy as np
import pytest

from vistaformer.errors import ConfigurationError, ShapeError
from vistaformer.interfaces import IModule
from vistaformer.lib import tensor as T
from vistaformer.nn.layers import *
from vistaformer.nn.layers import INIT_STD


def test_trunc_normal(rng):
    x = trunc_normal(rng, (1000,))
    assert np.abs(x).max() <= 2 * INIT_STD
    assert x.std() == pytest.approx(INIT_STD, rel=0.3)


def test_module_registration(rng):
    class Net(Module):
        def __init__(self):
            Module.__init__(self)
            self.a = Linear(2, 3, rng)
            self.blocks = ModuleList()
            self.blocks.append(Linear(3, 3, rng, bias=False))

    net = Net()
    assert IModule.providedBy(net.a)
    assert [n for n, _ in net.named_parameters()] == ['a.weight', 'a.bias', 'blocks.0.weight']
    assert net.num_parameters() == 6 + 3 + 9
    assert net.blocks[0].name == 'blocks.0'
    assert len(net.blocks) == 1

    assert not net.blocks[0].training
    net.train()
    assert all(m.training for m in net.modules())
    net.eval()
    assert not any(m.training for m in net.modules())

    gen = np.random.default_rng(1)
    net.set_rng(gen)
    assert net.blocks[0].rng is gen


def test_linear(rng):
    layer = Linear(4, 2, rng)
    assert layer(T.tensor(np.ones((3, 5, 4)))).shape == (3, 5, 2)
    assert layer.trace((3, 5, 4)) == (3, 5, 2)
    with pytest.raises(ShapeError):
        layer(T.tensor(np.ones((3, 5))))


def test_layer_norm():
    out = LayerNorm(6)(T.tensor(np.arange(12.0).reshape(2, 6))).data
    assert np.allclose(out.mean(axis=-1), 0, atol=1e-6)
    assert np.allclose(out.std(axis=-1), 1, atol=1e-3)


def test_conv3d(rng):
    conv = Conv3d(2, 4, (1, 2, 2), rng, stride=(1, 2, 2))
    assert conv(T.tensor(np.ones((1, 2, 3, 8, 8)))).shape == (1, 4, 3, 4, 4)
    assert conv.trace((1, 2, 3, 8, 8)) == (1, 4, 3, 4, 4)
    with pytest.raises(ConfigurationError):
        conv.trace((1, 2, 3, 1, 1))
    with pytest.raises(ConfigurationError):
        Conv3d(3, 4, 1, rng, groups=2)


def test_gated_conv(rng):
    layer = GatedConv3d(2, 4, (1, 2, 2), (1, 2, 2), rng)
    x = T.tensor(rng.standard_normal((1, 2, 2, 4, 4)))
    expected = layer.phi_l(x).data * (1 / (1 + np.exp(-layer.phi_m(x).data)))
    assert np.allclose(layer(x).data, expected, atol=1e-6)

    plain = GatedConv3d(2, 4, (1, 2, 2), (1, 2, 2), rng, gated=False)
    assert not plain.gated
    assert plain.num_parameters() * 2 == layer.num_parameters()
    assert np.allclose(plain(x).data, plain.phi_l(x).data)


def test_gated_conv_branches_must_match(rng):
    with pytest.raises(ConfigurationError):
        gated_conv3d(
            T.tensor(np.ones((1, 2, 2, 4, 4))),
            Conv3d(2, 4, 2, rng, stride=2),
            Conv3d(2, 4, 1, rng))


def test_gated_conv_gradients(float64, rng):
    from vistaformer.lib.gradcheck import grad_check

    layer = GatedConv3d(2, 3, (1, 2, 2), (1, 2, 2), rng)
    x = T.tensor(rng.standard_normal((1, 2, 2, 4, 4)))
    assert grad_check(layer, x, wrt=[x] + layer.parameters()).passed


def test_dropout(rng):
    layer = Dropout(0.5)
    x = T.tensor(np.ones((10, 10)))
    assert layer(x) is x
    layer.train().set_rng(rng)
    assert (layer(x).data == 0).any()
    with pytest.raises(ConfigurationError):
        Dropout(1.0)


def test_drop_path(rng):
    layer = DropPath(0.5).train().set_rng(rng)
    out = layer(T.tensor(np.ones((64, 3)))).data
    assert set(np.unique(out)) <= {0.0, 2.0}
    # Whole samples are dropped.
    assert np.all(out.min(axis=1) == out.max(axis=1))
    assert DropPath(0.0).train()(T.tensor(np.ones(2))).data.tolist() == [1, 1]
