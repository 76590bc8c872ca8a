"""Estimator base class and input-validation helpers.

Estimators follow the scikit-learn protocol: constructor arguments are
stored verbatim as attributes of the same name, ``fit`` returns self,
learned state uses a trailing underscore, and ``get_params`` /
``set_params`` allow composition with the wider ecosystem without
requiring scikit-learn itself.
"""

from __future__ import annotations

import inspect

import numpy as np

from .errors import NotFittedError

__all__ = [
    "Estimator",
    "check_fitted",
    "check_consistent_length",
    "as_float_matrix",
    "as_label_array",
    "check_prob_rows",
]


class Estimator:
    """Minimal scikit-learn-compatible parameter handling."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "Estimator":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters: {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def check_fitted(estimator, attribute: str) -> None:
    """Raise :class:`NotFittedError` unless ``attribute`` exists and is set."""
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )


def check_consistent_length(*arrays) -> int:
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise ValueError(f"inconsistent input lengths: {sorted(lengths)}")
    return lengths.pop()


def as_float_matrix(X, n_features: int | None = None, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 array, optionally checking width."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if n_features is not None and arr.shape[1] != n_features:
        raise ValueError(
            f"{name} has {arr.shape[1]} features, expected {n_features}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_label_array(y, n_classes: int = 3, name: str = "y") -> np.ndarray:
    """Coerce class labels to a 1-D int64 array in ``[0, n_classes)``."""
    arr = np.asarray(y, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise ValueError(f"{name} contains labels outside [0, {n_classes})")
    return arr


def check_prob_rows(P, atol: float = 1e-6, name: str = "probabilities") -> np.ndarray:
    """Validate an (n, 3) array of class-probability rows."""
    arr = as_float_matrix(P, n_features=3, name=name)
    if arr.size and arr.min() < -atol:
        raise ValueError(f"{name} contains negative entries")
    if arr.size and np.max(np.abs(arr.sum(axis=1) - 1.0)) > atol:
        raise ValueError(f"{name} rows do not sum to 1")
    return arr
