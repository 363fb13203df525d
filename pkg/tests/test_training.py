import json
import math

import numpy as np
import pytest
import torch

from novadet.datasets import load_mnist
from novadet.exceptions import (CheckpointVersionError, ConfigurationError,
                                DataIntegrityError)
from novadet.losses import LossWeights
from novadet.networks import ModelConfig
from novadet.pipeline import make_one_class_split
from novadet.training import (CHECKPOINT_VERSION, Checkpoint, TrainConfig,
                              Trainer, fit, load_checkpoint,
                              models_from_checkpoint, save_checkpoint)

TOY_MODEL = ModelConfig(in_channels=1, enc_channels=(16, 32), latent_dim=16,
                        reduction=4, disc_channels=(16, 32))


def toy_split(mnist_root, inlier=1, seed=0):
    return make_one_class_split(load_mnist(mnist_root), inlier, seed)


def toy_cfg(**kw):
    defaults = dict(batch_size=16, epochs=1, seed=0)
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestAdamContract:
    def test_matches_hand_stepped_scalar_adam(self):
        lr, b1, b2, eps = 0.1, 0.5, 0.999, 1e-8
        w = torch.tensor([0.7], dtype=torch.float64, requires_grad=True)
        opt = torch.optim.Adam([w], lr=lr, betas=(b1, b2), eps=eps)
        # oracle state
        w_ref, m, v = 0.7, 0.0, 0.0
        for t in range(1, 6):
            opt.zero_grad()
            loss = 0.5 * (w - 3.0) ** 2
            loss.sum().backward()
            opt.step()
            g = w_ref - 3.0
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            w_ref = w_ref - lr * m_hat / (math.sqrt(v_hat) + eps)
            assert abs(w.item() - w_ref) < 1e-12


class TestTrainStep:
    def test_context_only_step_decreases_context_loss(self, mnist_root):
        split = toy_split(mnist_root)
        cfg = toy_cfg(learning_rate=1e-3, noise_sigma=0.0,
                      weights=LossWeights(0, 1, 0, 0))
        trainer = Trainer(TOY_MODEL, cfg)
        batch = torch.from_numpy(split.train_x[:16])
        first, _ = trainer.train_step(batch)
        for _ in range(5):
            last, _ = trainer.train_step(batch)
        assert last.con < first.con

    def test_identical_seed_and_config_reproduce_loss_sequence(self, mnist_root):
        split = toy_split(mnist_root)

        def run():
            trainer = Trainer(TOY_MODEL, toy_cfg(seed=4))
            reports = []
            for i in range(4):
                batch = torch.from_numpy(split.train_x[i * 8:(i + 1) * 8])
                report, d = trainer.train_step(batch)
                reports.append((report.total, d))
            return reports

        assert run() == run()

    def test_optimizers_own_disjoint_parameter_sets(self):
        trainer = Trainer(TOY_MODEL, toy_cfg())
        g_params = {id(p) for group in trainer.opt_g.param_groups for p in group["params"]}
        d_params = {id(p) for group in trainer.opt_d.param_groups for p in group["params"]}
        assert not g_params & d_params
        assert g_params == {id(p) for p in trainer.gen.parameters()}
        assert d_params == {id(p) for p in trainer.disc.parameters()}

    def test_plain_dae_context_moving_average_decreases(self, mnist_root):
        split = toy_split(mnist_root)
        cfg = toy_cfg(learning_rate=1e-3, noise_sigma=0.1,
                      weights=LossWeights(0, 1, 0, 0), seed=1)
        trainer = Trainer(TOY_MODEL, cfg)
        rng = np.random.default_rng(0)
        cons = []
        for _ in range(60):
            idx = rng.choice(len(split.train_x), size=16, replace=False)
            report, _ = trainer.train_step(torch.from_numpy(split.train_x[idx]))
            cons.append(report.con)
        avg = np.convolve(cons, np.ones(20) / 20, mode="valid")
        assert avg[-1] < avg[0]


class TestValidate:
    def test_finite_positive_and_deterministic(self, mnist_root):
        split = toy_split(mnist_root)
        trainer = Trainer(TOY_MODEL, toy_cfg())
        a = trainer.validate(split.val_x)
        b = trainer.validate(split.val_x)
        assert math.isfinite(a) and a > 0
        assert a == b

    def test_empty_val_set_rejected(self, mnist_root):
        split = toy_split(mnist_root)
        trainer = Trainer(TOY_MODEL, toy_cfg())
        with pytest.raises(ConfigurationError):
            trainer.validate(split.val_x[:0])


class TestFit:
    def test_smoke_run_writes_log_and_checkpoint(self, mnist_root, tmp_path):
        split = toy_split(mnist_root)
        log = tmp_path / "train.jsonl"
        ckpt = fit(split, TOY_MODEL, toy_cfg(epochs=2), log_path=log)
        assert ckpt.epoch in (1, 2)
        records = [json.loads(line) for line in log.read_text().splitlines()]
        assert len(records) == 2
        assert set(records[0]) == {"epoch", "adv", "con", "fea", "inf", "total", "val"}
        path = tmp_path / "ckpt.pt"
        save_checkpoint(ckpt, path)
        loaded = load_checkpoint(path)
        assert loaded.epoch == ckpt.epoch

    def test_more_epochs_never_raise_best_val(self, mnist_root, tmp_path):
        split = toy_split(mnist_root)

        def best_val(epochs):
            log = tmp_path / f"log{epochs}.jsonl"
            fit(split, TOY_MODEL, toy_cfg(epochs=epochs, seed=2), log_path=log)
            vals = [json.loads(l)["val"] for l in log.read_text().splitlines()]
            return min(vals), vals[-1]

        best2, final2 = best_val(2)
        best4, _ = best_val(4)
        assert best2 <= final2
        assert best4 <= best2

    def test_empty_training_split_is_a_configuration_error(self, mnist_root):
        split = toy_split(mnist_root)
        split.train_x = split.train_x[:0]
        with pytest.raises(ConfigurationError):
            fit(split, TOY_MODEL, toy_cfg())

    def test_channel_mismatch_rejected(self, mnist_root):
        split = toy_split(mnist_root)
        bad = ModelConfig(in_channels=3, enc_channels=(16, 32), latent_dim=16,
                          reduction=4, disc_channels=(16, 32))
        with pytest.raises(ConfigurationError):
            fit(split, bad, toy_cfg())


class TestCheckpointIO:
    def make_ckpt(self, mnist_root):
        split = toy_split(mnist_root)
        return fit(split, TOY_MODEL, toy_cfg(), fingerprint="abc123"), split

    def test_round_trip_forward_outputs_bitwise_equal(self, mnist_root, tmp_path):
        ckpt, split = self.make_ckpt(mnist_root)
        path = tmp_path / "ckpt.pt"
        save_checkpoint(ckpt, path)
        gen_a, disc_a, _ = models_from_checkpoint(ckpt)
        gen_b, disc_b, _ = models_from_checkpoint(load_checkpoint(path))
        x = torch.from_numpy(split.test_x[:8])
        with torch.no_grad():
            assert torch.equal(gen_a(x)[0], gen_b(x)[0])
            assert torch.equal(disc_a(x)[0], disc_b(x)[0])

    def test_wrong_version_is_rejected(self, mnist_root, tmp_path):
        ckpt, _ = self.make_ckpt(mnist_root)
        ckpt.version = CHECKPOINT_VERSION + 1
        path = tmp_path / "ckpt.pt"
        save_checkpoint(ckpt, path)
        with pytest.raises(CheckpointVersionError):
            load_checkpoint(path)

    def test_truncated_file_is_integrity_error(self, mnist_root, tmp_path):
        ckpt, _ = self.make_ckpt(mnist_root)
        path = tmp_path / "ckpt.pt"
        save_checkpoint(ckpt, path)
        path.write_bytes(path.read_bytes()[:200])
        with pytest.raises(DataIntegrityError):
            load_checkpoint(path)

    def test_fingerprint_mismatch_warns(self, mnist_root, tmp_path):
        ckpt, _ = self.make_ckpt(mnist_root)
        path = tmp_path / "ckpt.pt"
        save_checkpoint(ckpt, path)
        with pytest.warns(UserWarning, match="fingerprint"):
            load_checkpoint(path, expected_fingerprint="something-else")
