"""From-scratch dense-network core: forward/backward passes, softmax
cross-entropy, Adam, and the seeded mini-batch training loop.

Everything runs in float64 and is deterministic given the seeds: weight
initialization draws from the "init" substream of the net seed, epoch
shuffling from the "shuffle" substream of the training seed. The
`grad_check` oracle compares analytic gradients against central finite
differences on a seeded sample of coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataFormatError, TrainingError
from .persist import load_container, save_container
from .rng import substream

__all__ = [
    "NetSpec",
    "MlpParams",
    "AdamState",
    "TrainConfig",
    "init_params",
    "forward",
    "softmax",
    "softmax_xent",
    "backward",
    "init_adam",
    "adam_step",
    "grad_check",
    "train",
    "save_params",
    "load_params",
]

DEFAULT_HIDDEN = (256, 128, 64, 64, 32, 16)


@dataclass(frozen=True)
class NetSpec:
    """Architecture and initialization of a dense classifier.

    ``init_mode`` "normal" draws every weight from N(0, init_sigma^2)
    (the literal reading of the source system); "scaled" divides each
    layer's sigma by sqrt(fan_in), which keeps activations O(1) in deep
    stacks and is the default used by the high-level model classes.
    """

    input_dim: int
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    output_dim: int = 3
    activation: str = "relu"  # "relu" or "linear"
    seed: int = 0
    init_sigma: float = 1.0
    init_mode: str = "normal"  # "normal" or "scaled"

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1 or any(w < 1 for w in self.hidden):
            raise ValueError("all layer widths must be >= 1")
        if self.activation not in ("relu", "linear"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.init_mode not in ("normal", "scaled"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "output_dim": self.output_dim,
            "activation": self.activation,
            "seed": self.seed,
            "init_sigma": self.init_sigma,
            "init_mode": self.init_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetSpec":
        return cls(
            input_dim=int(d["input_dim"]),
            hidden=tuple(int(w) for w in d["hidden"]),
            output_dim=int(d["output_dim"]),
            activation=str(d["activation"]),
            seed=int(d["seed"]),
            init_sigma=float(d["init_sigma"]),
            init_mode=str(d["init_mode"]),
        )


@dataclass
class MlpParams:
    """Per-layer weight matrices (out x in) and bias vectors (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def flat(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    @classmethod
    def from_flat(cls, arrays: list[np.ndarray]) -> "MlpParams":
        return cls(weights=list(arrays[0::2]), biases=list(arrays[1::2]))

    def copy(self) -> "MlpParams":
        return MlpParams([W.copy() for W in self.weights], [b.copy() for b in self.biases])


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 50
    epochs: int = 10
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


def init_params(spec: NetSpec) -> MlpParams:
    """Seeded weight initialization; biases start at zero."""
    rng = substream(spec.seed, "init")
    weights, biases = [], []
    widths = spec.widths
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        sigma = spec.init_sigma
        if spec.init_mode == "scaled":
            sigma = sigma / np.sqrt(fan_in)
        weights.append(rng.standard_normal((fan_out, fan_in)) * sigma)
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpParams(weights=weights, biases=biases)


def forward(
    params: MlpParams, X: np.ndarray, activation: str = "relu"
) -> tuple[np.ndarray, list]:
    """Run a batch through the network.

    Hidden layers apply affine then the activation; the output layer is
    affine only (logits). Returns (logits, cache) where the cache holds
    each layer's input and pre-activation for :func:`backward`.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.weights[0].shape[1]:
        raise ValueError(
            f"batch shape {X.shape} does not match input width "
            f"{params.weights[0].shape[1]}"
        )
    a = X
    cache = []
    last = params.n_layers - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W.T + b
        cache.append((a, z))
        if i < last and activation == "relu":
            a = np.maximum(z, 0.0)
        else:
            a = z
    return a, cache


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction stabilization."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_xent(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy loss and its gradient w.r.t. the logits.

    ``labels`` are class indices. The gradient is (softmax - onehot)
    divided by the batch size, matching the mean reduction.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    b, k = logits.shape
    if labels.shape != (b,):
        raise ValueError(f"labels shape {labels.shape} does not match batch {b}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels outside [0, {k})")
    m = logits.max(axis=1)
    lse = m + np.log(np.exp(logits - m[:, None]).sum(axis=1))
    loss = float(np.mean(lse - logits[np.arange(b), labels]))
    dlogits = softmax(logits)
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b
    return loss, dlogits


def backward(
    params: MlpParams, cache: list, dlogits: np.ndarray, activation: str = "relu"
) -> MlpParams:
    """Exact gradients of the cached forward pass w.r.t. all parameters.

    The ReLU subgradient at 0 is taken as 0. Returns gradients in the
    same container shape as the parameters.
    """
    if len(cache) != params.n_layers:
        raise ValueError("cache does not match network depth")
    dW = [None] * params.n_layers
    db = [None] * params.n_layers
    dz = np.asarray(dlogits, dtype=np.float64)
    for i in range(params.n_layers - 1, -1, -1):
        a_in, z = cache[i]
        dW[i] = dz.T @ a_in
        db[i] = dz.sum(axis=0)
        if i > 0:
            da = dz @ params.weights[i]
            if activation == "relu":
                _, z_prev = cache[i - 1]
                dz = da * (z_prev > 0.0)
            else:
                dz = da
    return MlpParams(weights=dW, biases=db)


@dataclass
class AdamState:
    """Per-parameter first/second moments and step counter.

    ``m`` and ``v`` mirror the flat parameter list. The update is the
    bias-corrected rule: p -= lr * m_hat / (sqrt(v_hat) + epsilon).
    """

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(
    params: list[np.ndarray],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(
    state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]
) -> tuple[AdamState, list[np.ndarray]]:
    """One Adam update over a flat list of parameter arrays (pure)."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params/grads do not match optimizer state")
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_m, new_v, new_p = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m2 = b1 * m + (1.0 - b1) * g
        v2 = b2 * v + (1.0 - b2) * g * g
        m_hat = m2 / bc1
        v_hat = v2 / bc2
        new_m.append(m2)
        new_v.append(v2)
        new_p.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon))
    return replace(state, m=new_m, v=new_v, t=t), new_p


def _loss_and_pattern(
    params: MlpParams, X: np.ndarray, y: np.ndarray, activation: str
) -> tuple[float, tuple]:
    """Loss plus the on/off pattern of every hidden ReLU."""
    logits, cache = forward(params, X, activation)
    loss, _ = softmax_xent(logits, y)
    if activation != "relu":
        return loss, ()
    return loss, tuple((z > 0.0).tobytes() for _, z in cache[:-1])


def grad_check(
    spec: NetSpec,
    X: np.ndarray,
    y: np.ndarray,
    eps: float = 1e-5,
    max_per_tensor: int = 150,
    seed: int = 0,
    min_grad: float = 1e-5,
    order: int = 2,
) -> float:
    """Max relative error between analytic and central-difference
    gradients over a seeded coordinate sample.

    Relative error per coordinate is
    |analytic - numeric| / max(1e-8, |analytic| + |numeric|).

    ``order`` selects the stencil: 2 is the classic two-point central
    difference with O(eps^2) truncation; 4 is the five-point stencil
    (8(f(+e) - f(-e)) - (f(+2e) - f(-2e))) / 12e, whose O(eps^4)
    truncation allows thresholds near the float64 noise floor.

    Two kinds of coordinate are excluded because the stencil cannot
    measure them: ones whose perturbations land on different sides of
    a ReLU kink (the quotient mixes two slopes there), and ones where
    analytic and numeric are both below ``min_grad`` (the quotient is
    float64 evaluation noise). A bug that zeroes or rescales a gradient
    tensor still surfaces: the numeric side stays large, so the
    coordinate is kept and mismatches.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    params = init_params(spec)
    logits, cache = forward(params, X, spec.activation)
    _, dlogits = softmax_xent(logits, y)
    grads = backward(params, cache, dlogits, spec.activation)
    rng = substream(seed, "gradcheck")
    steps = (eps,) if order == 2 else (eps, 2.0 * eps)
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
            diffs, patterns = [], []
            for h in steps:
                arr.flat[c] = orig + h
                f_plus, pat_plus = _loss_and_pattern(params, X, y, spec.activation)
                arr.flat[c] = orig - h
                f_minus, pat_minus = _loss_and_pattern(params, X, y, spec.activation)
                diffs.append(f_plus - f_minus)
                patterns.extend((pat_plus, pat_minus))
            arr.flat[c] = orig
            if any(p != patterns[0] for p in patterns[1:]):
                continue
            if order == 2:
                numeric = diffs[0] / (2.0 * eps)
            else:
                numeric = (8.0 * diffs[0] - diffs[1]) / (12.0 * eps)
            analytic = g.flat[c]
            if abs(analytic) < min_grad and abs(numeric) < min_grad:
                continue
            n_tested += 1
            denom = max(1e-8, abs(analytic) + abs(numeric))
            worst = max(worst, abs(analytic - numeric) / denom)
    if n_tested == 0:
        raise ValueError("no measurable coordinates; widen the net or batch")
    return worst


def train(
    spec: NetSpec,
    X: np.ndarray,
    y: np.ndarray,
    cfg: TrainConfig,
) -> tuple[MlpParams, list[float]]:
    """Seeded mini-batch training; returns final params and the mean
    per-example loss of each epoch.

    Batches are sequential slices of a fresh seeded permutation per
    epoch; the last batch may be short. Raises :class:`TrainingError`
    if the loss becomes non-finite.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    if n < 1 or y.shape != (n,):
        raise ValueError("X and y must be nonempty and aligned")
    params = init_params(spec)
    flat = params.flat()
    state = init_adam(flat, lr=cfg.lr)
    shuffle_rng = substream(cfg.seed, "shuffle")
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            Xb, yb = X[batch], y[batch]
            current = MlpParams.from_flat(flat)
            logits, cache = forward(current, Xb, spec.activation)
            loss, dlogits = softmax_xent(logits, yb)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch + 1}, "
                    f"batch {start // cfg.batch_size + 1}"
                )
            grads = backward(current, cache, dlogits, spec.activation)
            state, flat = adam_step(state, flat, grads.flat())
            total += loss * len(batch)
        history.append(total / n)
    return MlpParams.from_flat(flat), history


_PARAMS_KIND = "mlp-params"


def save_params(path, spec: NetSpec, params: MlpParams) -> None:
    """Persist spec + weights as float64 in the checksummed container."""
    arrays = {}
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
    save_container(path, {"kind": _PARAMS_KIND, "spec": spec.to_dict()}, arrays)


def load_params(path) -> tuple[NetSpec, MlpParams]:
    header, arrays = load_container(path)
    if header.get("kind") != _PARAMS_KIND:
        raise DataFormatError(f"{path}: not an MLP parameter file")
    spec = NetSpec.from_dict(header["spec"])
    n_layers = len(spec.widths) - 1
    try:
        weights = [arrays[f"W{i}"] for i in range(n_layers)]
        biases = [arrays[f"b{i}"] for i in range(n_layers)]
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing parameter array {exc}") from exc
    params = MlpParams(weights=weights, biases=biases)
    expected = list(zip(spec.widths[1:], spec.widths[:-1]))
    actual = [W.shape for W in weights]
    if actual != expected:
        raise DataFormatError(f"{path}: weight shapes {actual} do not match spec")
    return spec, params
