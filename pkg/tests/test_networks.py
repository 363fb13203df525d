import pytest
import torch

from novadet.attention import ChannelAttention
from novadet.exceptions import ConfigurationError, NumericError
from novadet.networks import Discriminator, Generator, ModelConfig, build_models

TOY = ModelConfig(in_channels=1, image_size=32, enc_channels=(16, 32),
                  latent_dim=16, reduction=4, disc_channels=(16, 32))


def test_default_shapes():
    gen, disc = build_models(ModelConfig(), seed=0)
    x = torch.zeros(4, 1, 32, 32)
    x_hat, h = gen(x)
    assert x_hat.shape == (4, 1, 32, 32)
    assert h.shape == (4, 128)
    prob, feat = disc(x)
    assert prob.shape == (4,)
    assert feat.ndim == 2 and feat.shape[0] == 4


def test_init_is_bitwise_deterministic():
    g1, d1 = build_models(TOY, seed=7)
    g2, d2 = build_models(TOY, seed=7)
    for a, b in zip(g1.state_dict().values(), g2.state_dict().values()):
        assert torch.equal(a, b)
    for a, b in zip(d1.state_dict().values(), d2.state_dict().values()):
        assert torch.equal(a, b)


def test_different_seeds_differ():
    g1, _ = build_models(TOY, seed=1)
    g2, _ = build_models(TOY, seed=2)
    assert any(not torch.equal(a, b) for a, b in
               zip(g1.state_dict().values(), g2.state_dict().values()))


def test_attention_mlp_widths_follow_reduction():
    cfg = ModelConfig(in_channels=3, latent_dim=128, reduction=16,
                      enc_channels=(64, 128, 256, 256))
    gen, _ = build_models(cfg, seed=0)
    cam = gen.encoder[0][-1]
    assert isinstance(cam, ChannelAttention)
    widths = [m.weight.shape for m in cam.mlp if isinstance(m, torch.nn.Linear)]
    assert widths == [torch.Size([4, 64]), torch.Size([4, 4]), torch.Size([64, 4])]


def test_bad_reduction_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        ModelConfig(in_channels=1, reduction=13, enc_channels=(64, 128, 256, 256))


def test_reconstruction_is_bounded():
    gen, _ = build_models(TOY, seed=3)
    x = (torch.rand(8, 1, 32, 32) * 2 - 1)
    x_hat, _ = gen(x)
    assert x_hat.min() >= -1 and x_hat.max() <= 1


def test_eval_forward_is_deterministic():
    gen, disc = build_models(TOY, seed=5)
    gen.eval(); disc.eval()
    x = torch.randn(4, 1, 32, 32).clamp(-1, 1)
    with torch.no_grad():
        a, ha = gen(x)
        b, hb = gen(x)
        pa, fa = disc(x)
        pb, fb = disc(x)
    assert torch.equal(a, b) and torch.equal(ha, hb)
    assert torch.equal(pa, pb) and torch.equal(fa, fb)


def test_discriminator_prob_strictly_inside_unit_interval():
    _, disc = build_models(ModelConfig(in_channels=3), seed=9)
    x = torch.randn(16, 3, 32, 32).clamp(-1, 1)
    prob, _ = disc(x)
    assert (prob > 0).all() and (prob < 1).all()


def test_decoder_spatial_dims_mirror_encoder():
    gen, _ = build_models(ModelConfig(), seed=0)
    gen.eval()
    enc_sizes, dec_sizes = [], []
    hooks = [blk.register_forward_hook(lambda m, i, o: enc_sizes.append(o.shape[-1]))
             for blk in gen.encoder]
    hooks += [blk.register_forward_hook(lambda m, i, o: dec_sizes.append(o.shape[-1]))
              for blk in gen.decoder]
    with torch.no_grad():
        gen(torch.zeros(1, 1, 32, 32))
    for h in hooks:
        h.remove()
    assert enc_sizes == [16, 8, 4, 2]
    # decoder block outputs retrace the encoder inputs: 4, 8, 16, 32
    assert dec_sizes == list(reversed(enc_sizes))[1:] + [32]


def test_nan_input_raises_numeric_error_naming_block():
    gen, _ = build_models(TOY, seed=0)
    x = torch.full((1, 1, 32, 32), float("nan"))
    with pytest.raises(NumericError, match="encoder block 0"):
        gen(x)


def test_use_attention_false_swaps_in_identity():
    cfg = ModelConfig(in_channels=1, enc_channels=(16, 32), latent_dim=16,
                      reduction=4, disc_channels=(16, 32), use_attention=False)
    gen, _ = build_models(cfg, seed=0)
    assert all(isinstance(blk[-1], torch.nn.Identity) for blk in gen.encoder)
