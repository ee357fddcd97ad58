"""Autoencoder patient vectors for erythemato-squamous disease classification.

The package parses and one-hot encodes the UCI dermatology records, learns a
low-dimensional representation with a stacked autoencoder, classifies the codes
with a dropout MLP and compares the result against classical baselines under
stratified 10-fold cross-validation.
"""

__version__ = "0.1.0"

from ._jit import BACKEND
from .data import load_dataset
from .evaluation import cross_validate, make_folds
from .pipeline import Derm2VecConfig, fit_derm2vec, predict

__all__ = ["BACKEND", "Derm2VecConfig", "__version__", "cross_validate", "fit_derm2vec",
           "load_dataset", "make_folds", "predict"]
