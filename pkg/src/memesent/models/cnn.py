"""Small convolutional classifier over 32x32x3 HSV tensors.

Fixed architecture: conv 3x3x8 -> ReLU -> 2x2 max-pool -> conv 3x3x16
-> ReLU -> 2x2 max-pool -> flatten -> dense 64 (ReLU) -> dense 3. All
convolutions are valid (no padding), pooling uses stride 2 and drops an
odd trailing row/column, and max-pool ties resolve to the first element
in window order so gradients are deterministic. Training reuses the
dense core's loss, optimizer, and seeded shuffling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..base import Estimator, as_label_array, check_consistent_length, check_fitted
from ..errors import DataFormatError, TrainingError
from ..nn import TrainConfig, adam_step, init_adam, softmax, softmax_xent
from ..persist import load_container, save_container
from ..rng import substream
from .image import IMAGE_SIZE

__all__ = ["CnnParams", "HsvCnnClassifier", "cnn_train", "cnn_grad_check"]

_CONV1 = (8, 3, 3, 3)  # out channels, in channels, kernel h, kernel w
_CONV2 = (16, 8, 3, 3)
_FLAT = 16 * 6 * 6  # after two conv+pool stages on 32x32 input
_DENSE = 64
_CLASSES = 3


@dataclass
class CnnParams:
    K1: np.ndarray
    b1: np.ndarray
    K2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    W4: np.ndarray
    b4: np.ndarray

    def flat(self) -> list[np.ndarray]:
        return [self.K1, self.b1, self.K2, self.b2,
                self.W3, self.b3, self.W4, self.b4]

    @classmethod
    def from_flat(cls, arrays: list[np.ndarray]) -> "CnnParams":
        return cls(*arrays)


def init_cnn_params(seed: int) -> CnnParams:
    """Seeded scaled-normal weights (sigma = 1/sqrt(fan_in)), zero biases."""
    rng = substream(seed, "init")

    def draw(shape, fan_in):
        return rng.standard_normal(shape) / np.sqrt(fan_in)

    return CnnParams(
        K1=draw(_CONV1, 3 * 3 * 3),
        b1=np.zeros(_CONV1[0]),
        K2=draw(_CONV2, 8 * 3 * 3),
        b2=np.zeros(_CONV2[0]),
        W3=draw((_DENSE, _FLAT), _FLAT),
        b3=np.zeros(_DENSE),
        W4=draw((_CLASSES, _DENSE), _DENSE),
        b4=np.zeros(_CLASSES),
    )


def _conv_forward(X, K, b):
    """Valid convolution; X (n, C, H, W), K (OC, C, kh, kw)."""
    n, C, H, W = X.shape
    OC, _, kh, kw = K.shape
    OH, OW = H - kh + 1, W - kw + 1
    out = np.zeros((n, OC, OH, OW))
    for u in range(kh):
        for v in range(kw):
            patch = X[:, :, u : u + OH, v : v + OW]
            out += np.einsum("ncij,oc->noij", patch, K[:, :, u, v])
    return out + b[None, :, None, None]


def _conv_backward(dout, X, K):
    n, C, H, W = X.shape
    OC, _, kh, kw = K.shape
    OH, OW = dout.shape[2], dout.shape[3]
    dK = np.zeros_like(K)
    dX = np.zeros_like(X)
    for u in range(kh):
        for v in range(kw):
            patch = X[:, :, u : u + OH, v : v + OW]
            dK[:, :, u, v] = np.einsum("noij,ncij->oc", dout, patch)
            dX[:, :, u : u + OH, v : v + OW] += np.einsum(
                "noij,oc->ncij", dout, K[:, :, u, v]
            )
    db = dout.sum(axis=(0, 2, 3))
    return dX, dK, db


def _pool_forward(X):
    """2x2 stride-2 max pool; returns (out, winner index per window)."""
    n, C, H, W = X.shape
    OH, OW = H // 2, W // 2
    win = (
        X[:, :, : OH * 2, : OW * 2]
        .reshape(n, C, OH, 2, OW, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, C, OH, OW, 4)
    )
    idx = win.argmax(axis=-1)  # first maximum wins ties
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return out, idx


def _pool_backward(dout, idx, in_shape):
    n, C, H, W = in_shape
    OH, OW = H // 2, W // 2
    dwin = np.zeros((n, C, OH, OW, 4))
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=-1)
    dX = np.zeros(in_shape)
    dX[:, :, : OH * 2, : OW * 2] = (
        dwin.reshape(n, C, OH, OW, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, C, OH * 2, OW * 2)
    )
    return dX


def _check_tensors(T) -> np.ndarray:
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 4 or T.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE, 3):
        raise ValueError(
            f"expected (n, {IMAGE_SIZE}, {IMAGE_SIZE}, 3) tensors, got {T.shape}"
        )
    if not np.all(np.isfinite(T)):
        raise ValueError("image tensors contain non-finite values")
    return T


def cnn_forward(params: CnnParams, T: np.ndarray) -> tuple[np.ndarray, dict]:
    """Logits for a batch of HSV tensors plus the backward cache."""
    T = _check_tensors(T)
    X = T.transpose(0, 3, 1, 2)  # to channel-first
    z1 = _conv_forward(X, params.K1, params.b1)
    a1 = np.maximum(z1, 0.0)
    p1, idx1 = _pool_forward(a1)
    z2 = _conv_forward(p1, params.K2, params.b2)
    a2 = np.maximum(z2, 0.0)
    p2, idx2 = _pool_forward(a2)
    flat = p2.reshape(len(T), -1)
    z3 = flat @ params.W3.T + params.b3
    a3 = np.maximum(z3, 0.0)
    logits = a3 @ params.W4.T + params.b4
    cache = dict(X=X, z1=z1, a1=a1, idx1=idx1, p1=p1, z2=z2, a2=a2,
                 idx2=idx2, p2=p2, flat=flat, z3=z3, a3=a3)
    return logits, cache


def cnn_backward(params: CnnParams, cache: dict, dlogits: np.ndarray) -> CnnParams:
    dW4 = dlogits.T @ cache["a3"]
    db4 = dlogits.sum(axis=0)
    da3 = dlogits @ params.W4
    dz3 = da3 * (cache["z3"] > 0.0)
    dW3 = dz3.T @ cache["flat"]
    db3 = dz3.sum(axis=0)
    dflat = dz3 @ params.W3
    dp2 = dflat.reshape(cache["p2"].shape)
    da2 = _pool_backward(dp2, cache["idx2"], cache["a2"].shape)
    dz2 = da2 * (cache["z2"] > 0.0)
    dp1, dK2, db2 = _conv_backward(dz2, cache["p1"], params.K2)
    da1 = _pool_backward(dp1, cache["idx1"], cache["a1"].shape)
    dz1 = da1 * (cache["z1"] > 0.0)
    _, dK1, db1 = _conv_backward(dz1, cache["X"], params.K1)
    return CnnParams(K1=dK1, b1=db1, K2=dK2, b2=db2,
                     W3=dW3, b3=db3, W4=dW4, b4=db4)


def _loss_and_pattern(params, T, y):
    logits, cache = cnn_forward(params, T)
    loss, _ = softmax_xent(logits, y)
    pattern = (
        (cache["z1"] > 0.0).tobytes(),
        cache["idx1"].tobytes(),
        (cache["z2"] > 0.0).tobytes(),
        cache["idx2"].tobytes(),
        (cache["z3"] > 0.0).tobytes(),
    )
    return loss, pattern


def cnn_grad_check(
    params: CnnParams,
    T: np.ndarray,
    y: np.ndarray,
    eps: float = 1e-5,
    max_per_tensor: int = 40,
    seed: int = 0,
    min_grad: float = 1e-5,
) -> float:
    """Central-difference check over a seeded coordinate sample.

    Coordinates that straddle a ReLU kink or a pooling-winner change,
    and coordinates where both gradients sit below ``min_grad`` (float64
    noise floor), are excluded — same policy as the dense-core checker.
    """
    y = as_label_array(y)
    logits, cache = cnn_forward(params, T)
    _, dlogits = softmax_xent(logits, y)
    grads = cnn_backward(params, cache, dlogits)
    rng = substream(seed, "gradcheck")
    worst = 0.0
    n_tested = 0
    for arr, g in zip(params.flat(), grads.flat()):
        size = arr.size
        if size <= max_per_tensor:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_per_tensor, replace=False)
        for c in coords:
            orig = arr.flat[c]
            arr.flat[c] = orig + eps
            f_plus, pat_plus = _loss_and_pattern(params, T, y)
            arr.flat[c] = orig - eps
            f_minus, pat_minus = _loss_and_pattern(params, T, y)
            arr.flat[c] = orig
            if pat_plus != pat_minus:
                continue
            numeric = (f_plus - f_minus) / (2.0 * eps)
            analytic = g.flat[c]
            if abs(analytic) < min_grad and abs(numeric) < min_grad:
                continue
            n_tested += 1
            denom = max(1e-8, abs(analytic) + abs(numeric))
            worst = max(worst, abs(analytic - numeric) / denom)
    if n_tested == 0:
        raise ValueError("no measurable coordinates")
    return worst


class HsvCnnClassifier(Estimator):
    """Softmax CNN on (n, 32, 32, 3) HSV tensors."""

    def __init__(
        self,
        batch_size: int = 50,
        epochs: int = 10,
        lr: float = 1e-3,
        shuffle: bool = True,
        seed: int = 0,
    ):
        self.batch_size = batch_size
        self.epochs = epochs
        self.lr = lr
        self.shuffle = shuffle
        self.seed = seed

    def fit(self, T, y) -> "HsvCnnClassifier":
        T = _check_tensors(T)
        y = as_label_array(y)
        n = check_consistent_length(T, y)
        cfg = TrainConfig(batch_size=self.batch_size, epochs=self.epochs,
                          lr=self.lr, seed=self.seed, shuffle=self.shuffle)
        params = init_cnn_params(self.seed)
        flat = params.flat()
        state = init_adam(flat, lr=cfg.lr)
        shuffle_rng = substream(cfg.seed, "shuffle")
        history: list[float] = []
        for epoch in range(cfg.epochs):
            order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                current = CnnParams.from_flat(flat)
                logits, cache = cnn_forward(current, T[batch])
                loss, dlogits = softmax_xent(logits, y[batch])
                if not np.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch + 1}, "
                        f"batch {start // cfg.batch_size + 1}"
                    )
                grads = cnn_backward(current, cache, dlogits)
                state, flat = adam_step(state, flat, grads.flat())
                total += loss * len(batch)
            history.append(total / n)
        self.params_ = CnnParams.from_flat(flat)
        self.history_ = history
        return self

    def predict_proba(self, T) -> np.ndarray:
        check_fitted(self, "params_")
        logits, _ = cnn_forward(self.params_, T)
        return softmax(logits)

    def predict(self, T) -> np.ndarray:
        return np.argmax(self.predict_proba(T), axis=1)

    def _payload(self) -> tuple[dict, dict[str, np.ndarray]]:
        check_fitted(self, "params_")
        arrays = {
            name: arr
            for name, arr in zip(
                ("K1", "b1", "K2", "b2", "W3", "b3", "W4", "b4"),
                self.params_.flat(),
            )
        }
        return {"kind": "cnn-hsv", "seed": self.seed}, arrays

    def save(self, path) -> None:
        header, arrays = self._payload()
        save_container(path, header, arrays)

    @classmethod
    def load(cls, path) -> "HsvCnnClassifier":
        header, arrays = load_container(path)
        if header.get("kind") != "cnn-hsv":
            raise DataFormatError(f"{path}: not an image-classifier file")
        return cls._from_payload(header, arrays, path)

    @classmethod
    def _from_payload(cls, header, arrays, path) -> "HsvCnnClassifier":
        model = cls(seed=int(header.get("seed", 0)))
        try:
            model.params_ = CnnParams(
                **{k: arrays[k] for k in
                   ("K1", "b1", "K2", "b2", "W3", "b3", "W4", "b4")}
            )
        except KeyError as exc:
            raise DataFormatError(f"{path}: missing parameter array {exc}") from exc
        if model.params_.K1.shape != _CONV1 or model.params_.K2.shape != _CONV2:
            raise DataFormatError(f"{path}: kernel shapes do not match architecture")
        return model


def cnn_train(T, y, cfg: TrainConfig | None = None) -> HsvCnnClassifier:
    cfg = cfg if cfg is not None else TrainConfig()
    model = HsvCnnClassifier(batch_size=cfg.batch_size, epochs=cfg.epochs,
                             lr=cfg.lr, shuffle=cfg.shuffle, seed=cfg.seed)
    return model.fit(T, y)
