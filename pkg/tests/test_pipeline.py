import numpy as np
import pytest

from derm2vec.autoencoder import AutoencoderSpec, encode
from derm2vec.errors import DivergenceError, ShapeError
from derm2vec.neural import TrainConfig
from derm2vec.pipeline import Derm2VecConfig, Derm2VecMethod, DnnMethod, fit_derm2vec, predict

FAST = TrainConfig(epochs=8)


def small_config(**kw):
    base = dict(ae_spec=AutoencoderSpec(encoding_dim=8, loss="binary_cross_entropy"),
                ae_train=FAST, clf_train=FAST, seed=3)
    base.update(kw)
    return Derm2VecConfig(**base)


def test_fit_and_predict_shapes(deep_matrix):
    x, y = deep_matrix.x, deep_matrix.labels
    model = fit_derm2vec(x[:200], y[:200], small_config())
    pred = predict(model, x[200:])
    assert pred.shape == (158,) and pred.dtype == np.int64
    assert set(pred) <= set(range(6))
    assert predict(model, x[:0]).shape == (0,)
    assert len(model.ae_history) == 8 and len(model.clf_history) == 8


def test_classifier_consumes_codes_not_raw_features(deep_matrix):
    model = fit_derm2vec(deep_matrix.x[:100], deep_matrix.labels[:100], small_config())
    assert model.classifier.spec.input_dim == 8
    assert encode(model.autoencoder, deep_matrix.x[:5]).shape == (5, 8)


def test_same_seed_same_model(deep_matrix):
    x, y = deep_matrix.x[:150], deep_matrix.labels[:150]
    a = fit_derm2vec(x, y, small_config())
    b = fit_derm2vec(x, y, small_config())
    assert np.array_equal(a.classifier.get_flat(), b.classifier.get_flat())
    c = fit_derm2vec(x, y, small_config(seed=4))
    assert not np.array_equal(a.classifier.get_flat(), c.classifier.get_flat())


def test_wrong_feature_width(deep_matrix):
    with pytest.raises(ShapeError):
        fit_derm2vec(deep_matrix.x[:, :128], deep_matrix.labels, small_config())


def test_divergence_names_the_stage(deep_matrix):
    bad = TrainConfig(epochs=20, learning_rate=1e6, optimizer="sgd")
    cfg = small_config(ae_spec=AutoencoderSpec(encoding_dim=8, loss="mean_squared_error",
                                               output_activation="linear"), ae_train=bad)
    with pytest.raises(DivergenceError) as err:
        fit_derm2vec(deep_matrix.x[:50], deep_matrix.labels[:50], cfg)
    assert err.value.stage == "autoencoder"


def test_methods_describe_without_seed():
    d = Derm2VecMethod(small_config()).describe()
    assert d["encoding_dim"] == 8 and d["ae_train"]["seed"] is None
    assert DnnMethod(hidden=(100,), dropout=0.5).describe()["dropout"] == 0.5


def test_dnn_method_fits_training_data(deep_matrix):
    x, y = deep_matrix.x, deep_matrix.labels
    predictor = DnnMethod(hidden=(32,), train=TrainConfig(epochs=30)).fit(x, y, seed=1)
    assert np.mean(predictor(x) == y) > 0.95
