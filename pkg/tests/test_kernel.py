"""The compiled training kernel must agree with the numpy reference engine."""

import numpy as np
import pytest

from ssilm import bitlang, ilm, kernel, neuralnet


def _param_pairs(agent_a, agent_b):
    return zip(agent_a.encoder.params() + agent_a.decoder.params(),
               agent_b.encoder.params() + agent_b.decoder.params())


@pytest.mark.parametrize("loss", ["mse", "bce"])
def test_supervised_step_matches_reference(loss):
    rng = np.random.default_rng(1)
    ref = neuralnet.mlp_init((5, 4, 3), rng)
    fast = ref.copy()
    x = rng.integers(0, 2, 5).astype(float)
    t = rng.integers(0, 2, 3).astype(float)
    neuralnet.sgd_step(ref, x, t, eta=5.0, loss=loss)
    ok = kernel._supervised_step(fast.w1, fast.b1, fast.w2, fast.b2, x, t, 5.0,
                                 kernel.LOSS_CODES[loss])
    assert ok
    for p, q in zip(ref.params(), fast.params()):
        assert np.allclose(p, q, atol=1e-14, rtol=0)


@pytest.mark.parametrize("loss", ["mse", "bce"])
def test_composite_step_matches_reference(loss):
    rng = np.random.default_rng(2)
    ref = neuralnet.agent_init(4, 3, 5, rng)
    fast = ref.copy()
    m = rng.integers(0, 2, 4).astype(float)
    neuralnet.autoencoder_step(ref, m, eta=5.0, loss=loss)
    ok = kernel._composite_step(
        fast.encoder.w1, fast.encoder.b1, fast.encoder.w2, fast.encoder.b2,
        fast.decoder.w1, fast.decoder.b1, fast.decoder.w2, fast.decoder.b2,
        m, 5.0, kernel.LOSS_CODES[loss])
    assert ok
    for p, q in _param_pairs(ref, fast):
        assert np.allclose(p, q, atol=1e-14, rtol=0)


@pytest.mark.parametrize("loss", ["mse", "bce"])
@pytest.mark.parametrize("auto_per", ["iteration", "epoch"])
def test_train_pupil_paths_equivalent(loss, auto_per):
    cfg = ilm.SimConfig(n1=4, n2=3, n3=4, bottleneck_size=10, auto_pool_size=12,
                        r=3, epochs=5, loss=loss, auto_per=auto_per)
    tutor = bitlang.random_table(4, 4, np.random.default_rng(9))
    fast = ilm.train_pupil(tutor, cfg, np.random.default_rng(33), use_kernel=True)
    ref = ilm.train_pupil(tutor, cfg, np.random.default_rng(33), use_kernel=False)
    for p, q in _param_pairs(fast, ref):
        assert np.allclose(p, q, atol=1e-12, rtol=0)
    assert np.array_equal(ilm.extract_language(fast).entries,
                          ilm.extract_language(ref).entries)


def test_train_pupil_kernel_deterministic():
    cfg = ilm.SimConfig(n1=4, n2=4, n3=4, bottleneck_size=8, auto_pool_size=10,
                        r=2, epochs=3)
    tutor = bitlang.identity_language(4)
    a = ilm.train_pupil(tutor, cfg, np.random.default_rng(5))
    b = ilm.train_pupil(tutor, cfg, np.random.default_rng(5))
    for p, q in _param_pairs(a, b):
        assert np.array_equal(p, q)


def test_kernel_flags_nonfinite_input():
    rng = np.random.default_rng(3)
    mlp = neuralnet.mlp_init((3, 2, 3), rng)
    x = np.array([np.nan, 0.0, 1.0])
    ok = kernel._supervised_step(mlp.w1, mlp.b1, mlp.w2, mlp.b2, x,
                                 np.ones(3), 1.0, 0)
    assert not ok
