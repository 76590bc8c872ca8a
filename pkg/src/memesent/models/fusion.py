"""Late fusion of the text and image branches.

Each branch emits a 3-class probability row; the two rows are
concatenated into a 6-component feature vector and a linear one-vs-rest
hinge-loss classifier (the stacker) picks the final label. The stacker
is trained by seeded per-sample subgradient descent with L2
regularization on the weights (biases unregularized). By default the
branch probabilities fed to stacker training come from out-of-fold
prediction, so the stacker never sees branch outputs on rows those
branches were trained on; in-sample features are available behind an
explicit flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..base import (
    Estimator,
    as_label_array,
    check_fitted,
    check_prob_rows,
)
from ..errors import DataFormatError
from ..nn import softmax
from ..persist import load_container, save_container
from ..rng import substream
from .cnn import HsvCnnClassifier, _check_tensors
from .ffnn import BowFfnnClassifier

__all__ = [
    "FusionStacker",
    "fusion_train",
    "fusion_predict",
    "BimodalFusionClassifier",
]

_FEATURES = 6  # two concatenated 3-class probability rows


@dataclass(frozen=True)
class FusionStacker:
    """Linear one-vs-rest scorer over [text probs | image probs]."""

    weights: np.ndarray  # (3, 6)
    biases: np.ndarray  # (3,)

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.biases, dtype=np.float64)
        if W.shape != (3, _FEATURES) or b.shape != (3,):
            raise ValueError(
                f"stacker needs (3, {_FEATURES}) weights and (3,) biases, "
                f"got {W.shape} and {b.shape}"
            )
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Per-class margins for (n, 6) feature rows."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != _FEATURES:
            raise ValueError(f"expected (n, {_FEATURES}) features, got {X.shape}")
        return X @ self.weights.T + self.biases


def _stack_features(text_probs, image_probs) -> np.ndarray:
    text = check_prob_rows(np.asarray(text_probs, dtype=np.float64))
    image = check_prob_rows(np.asarray(image_probs, dtype=np.float64))
    if len(text) != len(image):
        raise ValueError(
            f"text and image branches disagree on row count: "
            f"{len(text)} vs {len(image)}"
        )
    return np.hstack([text, image])


def fusion_train(
    text_probs,
    image_probs,
    labels,
    lam: float = 1e-3,
    epochs: int = 200,
    lr: float = 0.1,
    seed: int = 0,
) -> FusionStacker:
    """Fit the stacker on aligned branch-probability rows.

    One hinge problem per class (targets +1/-1), all three updated
    per sample: the regularizer shrinks weights every visit and active
    margins (< 1) add the signed feature row.
    """
    X = _stack_features(text_probs, image_probs)
    y = as_label_array(labels)
    if len(y) != len(X):
        raise ValueError(
            f"labels disagree on row count: {len(y)} vs {len(X)}"
        )
    if len(X) == 0:
        raise ValueError("cannot fit a stacker on zero rows")
    if lam < 0 or lr <= 0 or epochs <= 0:
        raise ValueError("lam must be >= 0, lr > 0, epochs > 0")
    rng = substream(seed, "stacker")
    W = np.zeros((3, _FEATURES))
    b = np.zeros(3)
    classes = np.arange(3)
    for _ in range(epochs):
        for i in rng.permutation(len(X)):
            x = X[i]
            t = np.where(classes == y[i], 1.0, -1.0)
            active = t * (W @ x + b) < 1.0
            W *= 1.0 - 2.0 * lr * lam
            push = lr * t * active
            W += push[:, None] * x[None, :]
            b += push
    return FusionStacker(weights=W, biases=b)


def fusion_predict(stacker: FusionStacker, text_row, image_row) -> int:
    """Final label for one caption/image pair of probability rows.

    Ties between per-class scores resolve to the lowest class index.
    """
    X = _stack_features(
        np.asarray(text_row, dtype=np.float64)[None, :],
        np.asarray(image_row, dtype=np.float64)[None, :],
    )
    return int(np.argmax(stacker.scores(X)[0]))


class BimodalFusionClassifier(Estimator):
    """Text branch + image branch + stacker, as one estimator.

    ``fit`` takes parallel captions, HSV tensors, and labels. With
    ``in_sample=False`` (default) the stacker trains on out-of-fold
    branch predictions: rows are split into ``folds`` seeded folds and
    each row's features come from branches trained without it. The
    final branch models are always refit on all rows.
    """

    def __init__(
        self,
        text: BowFfnnClassifier | None = None,
        image: HsvCnnClassifier | None = None,
        folds: int = 5,
        in_sample: bool = False,
        lam: float = 1e-3,
        stacker_epochs: int = 200,
        stacker_lr: float = 0.1,
        seed: int = 0,
    ):
        self.text = text
        self.image = image
        self.folds = folds
        self.in_sample = in_sample
        self.lam = lam
        self.stacker_epochs = stacker_epochs
        self.stacker_lr = stacker_lr
        self.seed = seed

    def _branches(self) -> tuple[BowFfnnClassifier, HsvCnnClassifier]:
        text = self.text if self.text is not None else BowFfnnClassifier(seed=self.seed)
        image = self.image if self.image is not None else HsvCnnClassifier(seed=self.seed)
        return text, image

    @staticmethod
    def _clone(est):
        return type(est)(**est.get_params())

    def _oof_features(self, captions, tensors, y, text, image):
        n = len(y)
        if self.folds < 2:
            raise ValueError("out-of-fold features need folds >= 2")
        if n < self.folds:
            raise ValueError(
                f"need at least {self.folds} rows for {self.folds}-fold "
                f"out-of-fold features, got {n}"
            )
        order = substream(self.seed, "oof").permutation(n)
        text_probs = np.zeros((n, 3))
        image_probs = np.zeros((n, 3))
        for chunk in np.array_split(order, self.folds):
            held = np.zeros(n, dtype=bool)
            held[chunk] = True
            rest = np.flatnonzero(~held)
            fold_text = self._clone(text).fit(
                [captions[i] for i in rest], y[rest]
            )
            fold_image = self._clone(image).fit(tensors[rest], y[rest])
            text_probs[chunk] = fold_text.predict_proba(
                [captions[i] for i in chunk]
            )
            image_probs[chunk] = fold_image.predict_proba(tensors[chunk])
        return text_probs, image_probs

    def fit(self, captions: list[str], tensors, y) -> "BimodalFusionClassifier":
        tensors = _check_tensors(tensors)
        y = as_label_array(y)
        if not (len(captions) == len(tensors) == len(y)):
            raise ValueError(
                f"captions, tensors, and labels disagree on row count: "
                f"{len(captions)}, {len(tensors)}, {len(y)}"
            )
        text, image = self._branches()
        self.text_ = self._clone(text).fit(list(captions), y)
        self.image_ = self._clone(image).fit(tensors, y)
        if self.in_sample:
            text_probs = self.text_.predict_proba(list(captions))
            image_probs = self.image_.predict_proba(tensors)
        else:
            text_probs, image_probs = self._oof_features(
                list(captions), tensors, y, text, image
            )
        self.stacker_ = fusion_train(
            text_probs,
            image_probs,
            y,
            lam=self.lam,
            epochs=self.stacker_epochs,
            lr=self.stacker_lr,
            seed=self.seed,
        )
        return self

    def _scores(self, captions, tensors) -> np.ndarray:
        check_fitted(self, "stacker_")
        X = _stack_features(
            self.text_.predict_proba(list(captions)),
            self.image_.predict_proba(tensors),
        )
        return self.stacker_.scores(X)

    def predict(self, captions, tensors) -> np.ndarray:
        return np.argmax(self._scores(captions, tensors), axis=1)

    def predict_proba(self, captions, tensors) -> np.ndarray:
        """Softmax over stacker scores.

        Hinge scores are margins, not calibrated log-odds; the softmax
        is a rank-preserving squash so downstream reporting can treat
        every model uniformly.
        """
        return softmax(self._scores(captions, tensors))

    def save(self, path) -> None:
        check_fitted(self, "stacker_")
        text_header, text_arrays = self.text_._payload()
        image_header, image_arrays = self.image_._payload()
        header = {
            "kind": "fusion-bimodal",
            "folds": self.folds,
            "in_sample": self.in_sample,
            "lam": self.lam,
            "stacker_epochs": self.stacker_epochs,
            "stacker_lr": self.stacker_lr,
            "seed": self.seed,
            "text": text_header,
            "image": image_header,
        }
        arrays: dict[str, np.ndarray] = {
            "stacker_W": self.stacker_.weights,
            "stacker_b": self.stacker_.biases,
        }
        arrays.update({f"text.{k}": v for k, v in text_arrays.items()})
        arrays.update({f"image.{k}": v for k, v in image_arrays.items()})
        save_container(path, header, arrays)

    @classmethod
    def load(cls, path) -> "BimodalFusionClassifier":
        header, arrays = load_container(path)
        if header.get("kind") != "fusion-bimodal":
            raise DataFormatError(f"{path}: not a fusion-model file")
        if header["text"].get("kind") != "ffnn-bow":
            raise DataFormatError(
                f"{path}: unsupported text branch {header['text'].get('kind')!r}"
            )
        if header["image"].get("kind") != "cnn-hsv":
            raise DataFormatError(
                f"{path}: unsupported image branch {header['image'].get('kind')!r}"
            )
        split = lambda prefix: {
            k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)
        }
        model = cls(
            folds=int(header.get("folds", 5)),
            in_sample=bool(header.get("in_sample", False)),
            lam=float(header.get("lam", 1e-3)),
            stacker_epochs=int(header.get("stacker_epochs", 200)),
            stacker_lr=float(header.get("stacker_lr", 0.1)),
            seed=int(header.get("seed", 0)),
        )
        model.text_ = BowFfnnClassifier._from_payload(
            header["text"], split("text."), path
        )
        model.image_ = HsvCnnClassifier._from_payload(
            header["image"], split("image."), path
        )
        try:
            model.stacker_ = FusionStacker(
                weights=arrays["stacker_W"], biases=arrays["stacker_b"]
            )
        except KeyError as exc:
            raise DataFormatError(f"{path}: missing parameter array {exc}") from exc
        return model
