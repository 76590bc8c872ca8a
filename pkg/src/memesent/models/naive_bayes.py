"""Multinomial Naive Bayes over caption tokens.

Priors are class frequencies; token likelihoods use Laplace smoothing:
P(token | class) = (count + alpha) / (class token total + alpha * |V|).
Tokens unseen in training are skipped at prediction time (their
likelihood would be a class-independent constant under shared
smoothing, so skipping changes nothing but saves the lookup). An empty
token list yields the prior distribution.
"""

from __future__ import annotations

import numpy as np

from ..base import Estimator, as_label_array, check_consistent_length, check_fitted
from ..errors import DataFormatError, TrainingError
from ..persist import load_container, save_container

__all__ = ["MultinomialNaiveBayes", "nb_train", "nb_predict"]

N_CLASSES = 3


class MultinomialNaiveBayes(Estimator):
    """Token-count Naive Bayes with Laplace smoothing.

    Fitted attributes: ``vocabulary_`` (sorted token tuple),
    ``class_log_prior_`` (3,), ``token_log_likelihood_`` (3, |V|).
    """

    def __init__(self, alpha: float = 1.0):
        self.alpha = alpha

    def fit(self, X: list[list[str]], y) -> "MultinomialNaiveBayes":
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        y = as_label_array(y, N_CLASSES)
        check_consistent_length(X, y)
        if len(X) == 0:
            raise TrainingError("cannot fit Naive Bayes on an empty corpus")

        vocab = sorted({t for tokens in X for t in tokens})
        index = {t: i for i, t in enumerate(vocab)}
        counts = np.zeros((N_CLASSES, len(vocab)), dtype=np.float64)
        class_counts = np.zeros(N_CLASSES, dtype=np.float64)
        for tokens, label in zip(X, y):
            class_counts[label] += 1
            for t in tokens:
                counts[label, index[t]] += 1

        self.vocabulary_ = tuple(vocab)
        self._index = index
        # Classes absent from training keep a -inf prior: they can never
        # win the argmax but still occupy their probability slot.
        with np.errstate(divide="ignore"):
            self.class_log_prior_ = np.log(class_counts / class_counts.sum())
        totals = counts.sum(axis=1, keepdims=True)
        self.token_log_likelihood_ = np.log(counts + self.alpha) - np.log(
            totals + self.alpha * len(vocab)
        )
        return self

    def predict_proba(self, X: list[list[str]]) -> np.ndarray:
        check_fitted(self, "class_log_prior_")
        out = np.zeros((len(X), N_CLASSES), dtype=np.float64)
        for i, tokens in enumerate(X):
            scores = self.class_log_prior_.copy()
            for t in tokens:
                j = self._index.get(t)
                if j is not None:
                    scores += self.token_log_likelihood_[:, j]
            m = scores.max()
            e = np.exp(scores - m)
            out[i] = e / e.sum()
        return out

    def predict(self, X: list[list[str]]) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def save(self, path) -> None:
        check_fitted(self, "class_log_prior_")
        save_container(
            path,
            {
                "kind": "naive-bayes",
                "alpha": self.alpha,
                "vocabulary": list(self.vocabulary_),
            },
            {
                "class_log_prior": self.class_log_prior_,
                "token_log_likelihood": self.token_log_likelihood_,
            },
        )

    @classmethod
    def load(cls, path) -> "MultinomialNaiveBayes":
        header, arrays = load_container(path)
        if header.get("kind") != "naive-bayes":
            raise DataFormatError(f"{path}: not a Naive Bayes model file")
        model = cls(alpha=float(header["alpha"]))
        model.vocabulary_ = tuple(header["vocabulary"])
        model._index = {t: i for i, t in enumerate(model.vocabulary_)}
        model.class_log_prior_ = arrays["class_log_prior"]
        model.token_log_likelihood_ = arrays["token_log_likelihood"]
        if model.token_log_likelihood_.shape != (N_CLASSES, len(model.vocabulary_)):
            raise DataFormatError(f"{path}: likelihood table shape mismatch")
        return model


def nb_train(X: list[list[str]], y, alpha: float = 1.0) -> MultinomialNaiveBayes:
    return MultinomialNaiveBayes(alpha=alpha).fit(X, y)


def nb_predict(model: MultinomialNaiveBayes, tokens: list[str]) -> np.ndarray:
    """Posterior distribution for a single token list."""
    return model.predict_proba([tokens])[0]
