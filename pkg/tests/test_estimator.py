import numpy as np
import pytest
from sklearn.base import clone

from novadet.datasets import load_mnist
from novadet.estimator import NoveltyDetector
from novadet.exceptions import ConfigurationError
from novadet.pipeline import preprocess


def small_detector(**kw):
    defaults = dict(enc_channels=(16, 32), disc_channels=(16, 32), latent_dim=16,
                    reduction=4, epochs=2, batch_size=16, random_state=0)
    defaults.update(kw)
    return NoveltyDetector(**defaults)


@pytest.fixture(scope="module")
def digit_images(mnist_root):
    raw = load_mnist(mnist_root)
    inliers = preprocess(raw.train_images[raw.train_labels == 1])
    outliers = preprocess(raw.train_images[raw.train_labels == 7])
    return inliers, outliers


def test_get_params_round_trip_and_clone():
    det = small_detector(score_lambda=0.8)
    params = det.get_params()
    assert params["score_lambda"] == 0.8
    assert params["latent_dim"] == 16
    cloned = clone(det)
    assert cloned.get_params() == params
    det.set_params(epochs=5)
    assert det.get_params()["epochs"] == 5


def test_fit_then_score_and_predict(digit_images):
    inliers, outliers = digit_images
    det = small_detector(epochs=20).fit(inliers)
    s_in = det.score_samples(inliers)
    s_out = det.score_samples(outliers)
    # sklearn convention: higher score = more normal
    assert s_in.mean() > s_out.mean()
    preds = det.predict(inliers)
    assert set(preds) <= {-1, 1}
    # threshold sits at the contamination quantile of the training scores
    assert (preds == -1).mean() == pytest.approx(det.contamination, abs=0.1)


def test_novelty_scores_are_negated_score_samples(digit_images):
    inliers, _ = digit_images
    det = small_detector().fit(inliers[:30])
    x = inliers[30:40]
    np.testing.assert_allclose(det.novelty_scores(x), -det.score_samples(x), atol=1e-7)


def test_three_dim_input_gets_channel_axis(digit_images):
    inliers, _ = digit_images
    det = small_detector(epochs=1).fit(inliers[:40, 0])
    assert det.model_config_.in_channels == 1


def test_rejects_unscaled_pixels():
    X = np.random.uniform(0, 255, size=(10, 1, 32, 32)).astype(np.float32)
    with pytest.raises(ConfigurationError):
        small_detector().fit(X)


def test_rejects_bad_channel_count():
    X = np.zeros((10, 5, 32, 32), dtype=np.float32)
    with pytest.raises(ConfigurationError):
        small_detector().fit(X)


def test_fit_is_deterministic_in_random_state(digit_images):
    inliers, _ = digit_images
    a = small_detector().fit(inliers[:30]).novelty_scores(inliers[30:40])
    b = small_detector().fit(inliers[:30]).novelty_scores(inliers[30:40])
    np.testing.assert_array_equal(a, b)
