"""
Unit tests for models.gan

Tests adversarial losses and gradients (dropout replayed), training traces,
discriminator scoring and latent inversion.
"""

import numpy as np
import pydantic
import pytest

from gfd.common.errors import ValidationError
from gfd.engine.layers import build_net, forward
from gfd.engine.optim import AdamState, apply_adam
from gfd.engine.rng import RngStream
from gfd.models.gan import (
    GanModel,
    GanTrainConfig,
    build_gan,
    discriminator_gradients,
    discriminator_loss,
    generator_gradients,
    generator_loss,
    invert_latent,
    invert_latent_batch,
    score_discriminator,
    score_discriminator_batch,
    score_inversion,
    score_batch,
    train,
)


def _tiny(seed=0, out="sigmoid"):
    rng = RngStream(seed)
    generator = build_net([3, 5, 6, 4], ["leaky_relu", "leaky_relu", out], rng)
    discriminator = build_net([4, 6, 5, 1], ["leaky_relu", "leaky_relu", "sigmoid"], rng, dropout_layers=(0, 1))
    return GanModel(generator, discriminator, noise_dim=3, dropout_rate=0.4)


def _toy_windows(n, seed):
    rng = np.random.default_rng(seed)
    return np.clip(rng.normal([0.3, 0.7], 0.08, (n, 2)), 0.0, 1.0)


class TestGradients:
    """Test both networks against finite differences"""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_discriminator_gradients(self, seed, numgrad, relerr):
        model = _tiny(seed)
        data = np.random.default_rng(seed)
        real, fake = data.uniform(0, 1, (4, 4)), data.uniform(0, 1, (4, 4))

        def loss():
            return discriminator_loss(model, real, fake, RngStream(7))[0]

        _, tape, out = discriminator_loss(model, real, fake, RngStream(7))
        grads = discriminator_gradients(model, tape, out)
        for k, layer in enumerate(model.discriminator.layers):
            assert relerr(grads.weights[k], numgrad(loss, layer.weights)) < 1e-4
            assert relerr(grads.biases[k], numgrad(loss, layer.biases)) < 1e-4

    @pytest.mark.parametrize("out", ["sigmoid", "tanh"])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_generator_gradients(self, out, seed, numgrad, relerr):
        model = _tiny(seed, out)
        z = np.random.default_rng(seed).standard_normal((5, 3))

        def loss():
            return generator_loss(model, z, RngStream(7))[0]

        _, tapes, d_out = generator_loss(model, z, RngStream(7))
        grads = generator_gradients(model, tapes, d_out)
        for k, layer in enumerate(model.generator.layers):
            assert relerr(grads.weights[k], numgrad(loss, layer.weights)) < 1e-4
            assert relerr(grads.biases[k], numgrad(loss, layer.biases)) < 1e-4

    def test_generator_step_leaves_discriminator_untouched(self):
        model = _tiny(3)
        before = [p.copy() for p in model.discriminator.parameters()]
        _, tapes, d_out = generator_loss(model, np.ones((2, 3)), RngStream(1))
        apply_adam(model.generator, AdamState(), generator_gradients(model, tapes, d_out))
        for p, q in zip(before, model.discriminator.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_discriminator_loss_needs_matching_batches(self):
        with pytest.raises(ValidationError):
            discriminator_loss(_tiny(), np.ones((2, 4)), np.ones((3, 4)), RngStream(0))


class TestConfig:
    """Test defaults"""

    def test_published_optimizer_settings(self):
        cfg = GanTrainConfig()
        assert (cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.dropout_rate) == (0.0002, 0.5, 0.999, 0.4)

    def test_architecture(self):
        model = build_gan(10, GanTrainConfig(noise_dim=8))
        assert [l.out_dim for l in model.generator.layers] == [256, 512, 10]
        assert [l.out_dim for l in model.discriminator.layers] == [512, 256, 1]
        assert [l.dropout for l in model.discriminator.layers] == [True, True, False]

    def test_epochs_must_be_positive(self):
        with pytest.raises(pydantic.ValidationError):
            GanTrainConfig(epochs=0)


class TestTraining:
    """Test adversarial training"""

    def test_first_batch_loss_matches_logged_outputs(self):
        cfg = GanTrainConfig(epochs=1, batch_size=8, noise_dim=4, seed=2)
        _, trace = train(build_gan(2, cfg), _toy_windows(16, 0), cfg)
        by_hand = -(np.mean(np.log(trace.first_d_real)) + np.mean(np.log(1.0 - trace.first_d_fake))) / 2
        assert trace.first_d_loss == pytest.approx(by_hand, rel=1e-12)
        assert len(trace.d_losses) == len(trace.g_losses) == 1

    def test_seeded(self):
        cfg = GanTrainConfig(epochs=2, batch_size=8, noise_dim=4, seed=5)
        a, ta = train(build_gan(2, cfg), _toy_windows(16, 1), cfg)
        b, tb = train(build_gan(2, cfg), _toy_windows(16, 1), cfg)
        assert ta.d_losses == tb.d_losses
        for p, q in zip(a.generator.parameters(), b.generator.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_needs_a_full_batch(self):
        cfg = GanTrainConfig(epochs=1, batch_size=32)
        with pytest.raises(ValidationError):
            train(build_gan(2, cfg), _toy_windows(10, 0), cfg)

    @pytest.mark.slow
    def test_toy_distribution_neither_collapses_nor_separates(self):
        cfg = GanTrainConfig(epochs=60, batch_size=32, noise_dim=4, seed=0)
        model, _ = train(build_gan(2, cfg), _toy_windows(256, 0), cfg)
        held_out = 1.0 - score_discriminator_batch(model, _toy_windows(200, 99))
        assert 0.2 < held_out.mean() < 0.8


class TestScoring:
    """Test discriminator and inversion scores"""

    def test_discriminator_score_range_and_determinism(self):
        model = _tiny()
        x = np.random.default_rng(0).uniform(0, 1, (6, 4))
        s = score_discriminator_batch(model, x)
        assert np.all((s > 0) & (s < 1))
        np.testing.assert_array_equal(s, score_discriminator_batch(model, x))
        assert score_discriminator(model, x[1]) == pytest.approx(s[1], rel=1e-12)

    def test_inversion_at_known_code_is_zero(self):
        model = _tiny(1)
        z0 = np.array([0.3, -1.0, 0.5])
        window, _ = forward(model.generator, z0)
        _, trace = invert_latent(model, window, n_steps=1, lr=0.1, z0=z0)
        assert trace[-1] <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_inversion_descends(self, seed):
        model = _tiny(seed)
        window = np.random.default_rng(seed).uniform(0, 1, 4)
        z, trace = invert_latent(model, window, n_steps=50, lr=0.5, seed=seed)
        assert z.shape == (3,)
        assert all(b <= a + 1e-10 for a, b in zip(trace, trace[1:]))
        assert score_inversion(model, window, n_steps=50, lr=0.5, seed=seed) == trace[-1]

    def test_inversion_needs_steps(self):
        with pytest.raises(ValidationError):
            invert_latent(_tiny(), np.zeros(4), n_steps=0, lr=0.1)

    def test_full_blend_is_discriminator_score(self):
        model = _tiny(2)
        window = np.full(4, 0.5)
        assert score_inversion(model, window, n_steps=3, blend=1.0) == pytest.approx(score_discriminator(model, window))

    @pytest.mark.parametrize("seed", range(3))
    def test_batch_inversion_matches_one_window_at_a_time(self, seed):
        model = _tiny(seed)
        windows = np.random.default_rng(seed).uniform(0, 1, (5, 4))
        z, traces = invert_latent_batch(model, windows, n_steps=30, lr=0.5, seed=seed)
        assert z.shape == (5, 3)
        for row, window in enumerate(windows):
            z_one, trace = invert_latent(model, window, n_steps=30, lr=0.5, seed=seed)
            assert len(traces[row]) == len(trace)
            np.testing.assert_allclose(traces[row], trace, rtol=1e-9, atol=1e-14)
            np.testing.assert_allclose(z[row], z_one, rtol=1e-9, atol=1e-12)

    def test_score_batch_follows_configured_score(self):
        model = _tiny(3)
        windows = np.random.default_rng(3).uniform(0, 1, (4, 4))
        config = GanTrainConfig(score="inversion", inversion_steps=20, inversion_lr=0.5, seed=1)
        scores = score_batch(model, windows, config)
        expected = [score_inversion(model, w, n_steps=20, lr=0.5, seed=1) for w in windows]
        np.testing.assert_allclose(scores, expected, rtol=1e-9, atol=1e-14)
        np.testing.assert_array_equal(
            score_batch(model, windows, GanTrainConfig()), score_discriminator_batch(model, windows)
        )
