import pytest

from derm2vec.config import (ExperimentConfig, load_config, parse_config, parse_derm2vec_rows,
                             parse_dnn_rows)
from derm2vec.errors import ConfigError


def test_default_config_reproduces_all_tables():
    cfg = load_config()
    assert cfg.kinds == ("dnn_sweep", "derm2vec_sweep", "comparison")
    assert len(cfg.dnn_rows) == 10 and len(cfg.derm2vec_rows) == 15
    assert cfg.dnn_rows[3].hidden == (100,) and cfg.dnn_rows[3].dropout == 0.5
    assert cfg.dnn_rows[3].published == 96.65
    row5 = cfg.derm2vec_rows[4]
    assert (row5.encoding_dim, row5.hidden, row5.dropout, row5.published) == (32, (100,), 0.5, 96.92)
    assert cfg.methods == ("derm2vec", "dnn", "xgboost", "dt", "ann", "svc", "rf", "nb", "knn")
    assert cfg.published["knn"] == 79.30
    assert cfg.ae_spec.loss == "binary_cross_entropy"
    assert cfg.baseline_age_scaling == "none" and cfg.deep_age_scaling == "minmax"


def test_for_tables_selects_kinds():
    assert load_config().for_tables([3, 1]).kinds == ("comparison", "dnn_sweep")


def test_row_parsers():
    assert parse_dnn_rows("100, 100 ; none ; 96.1\n300;0.5")[1].dropout == 0.5
    rows = parse_derm2vec_rows("8 ; 100 ; 0.5  # comment\n")
    assert rows[0].encoding_dim == 8 and rows[0].published is None


@pytest.mark.parametrize("text, field", [
    ("[experiment]\nkinds = bogus\n", "experiment.kinds"),
    ("[experiment]\nseeds = 0\n", "experiment.seeds"),
    ("[experiment]\nfolds = x\n", "experiment.folds"),
    ("[experiment]\nkinds = dnn_sweep\n", "dnn_sweep.rows"),
    ("[experiment]\nkinds = dnn_sweep\n[dnn_sweep]\nrows = 100 ; 1.5\n", "dnn_sweep.rows[1]"),
    ("[experiment]\nkinds = dnn_sweep\n[dnn_sweep]\nrows = 100, x ; none\n", "dnn_sweep.rows[1]"),
    ("[experiment]\nkinds = derm2vec_sweep\n[derm2vec_sweep]\nrows = 4, 5 ; 100 ; none\n",
     "derm2vec_sweep.rows[1]"),
    ("[experiment]\nkinds = comparison\n[comparison]\nmethods = knn, lasso\n", "comparison.methods"),
    ("[experiment]\nkinds = comparison\n[comparison]\nmethods = dnn\ndnn_row = 3\n", "comparison.dnn_row"),
    ("[experiment]\nkinds = single\n[single]\nmethod = svc\n", "single.method"),
    ("[autoencoder]\nloss = hinge\n", "autoencoder"),
    ("[experiment]\ndeep_age_scaling = zscore\n", "experiment.deep_age_scaling"),
])
def test_config_errors_carry_field_path(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.ini")


def test_minimal_single_config():
    cfg = parse_config("[experiment]\nkinds = single\nseed = 5\n[single]\nmethod = knn\n")
    assert cfg.seed == 5 and cfg.single == {"method": "knn"}
    assert isinstance(cfg, ExperimentConfig)
