"""Layer and loss primitives with hand-derived backward passes.

Every layer follows the same functional convention: ``*_forward`` takes the
input batch plus a parameter container and returns ``(output, cache)``;
``*_backward`` takes the upstream gradient plus that cache and returns the
gradient w.r.t. the input followed by the gradients w.r.t. each parameter, in
the order the parameters appear in the container.  Parameter containers are
never mutated by forward/backward, with one documented exception: batch
normalization updates its running statistics in place during train-mode
forward.

Gradients are exact analytic derivatives; :func:`grad_check` is the
central-difference harness used by the test and verification suites to hold
them to that claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import RngState, matmul, relu, sigmoid, tanh, xavier_init

__all__ = [
    "FcParams",
    "BatchNormParams",
    "GruParams",
    "fc_init",
    "fc_forward",
    "fc_backward",
    "batchnorm_init",
    "batchnorm_forward",
    "batchnorm_backward",
    "dropout_forward",
    "dropout_backward",
    "relu_forward",
    "relu_backward",
    "gru_init",
    "gru_cell_forward",
    "gru_cell_backward",
    "gru_sequence_forward",
    "gru_sequence_backward",
    "gru_zero_grads",
    "softmax",
    "softmax_cross_entropy",
    "mse_loss",
    "grad_check",
]


# ---------------------------------------------------------------------------
# Fully connected
# ---------------------------------------------------------------------------

@dataclass
class FcParams:
    """Affine layer parameters: ``W`` is (out, in), ``b`` is (out,)."""

    W: np.ndarray
    b: np.ndarray


def fc_init(n_in: int, n_out: int, rng: RngState) -> FcParams:
    return FcParams(W=xavier_init(n_out, n_in, rng), b=np.zeros(n_out))


def fc_forward(x: np.ndarray, p: FcParams):
    """y = x W^T + b, broadcast over the batch dimension."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.W.shape[1]:
        raise ShapeError(f"fc input shape {x.shape} incompatible with W {p.W.shape}")
    y = matmul(x, p.W.T) + p.b
    return y, (x, p)


def fc_backward(grad_out: np.ndarray, cache):
    """Returns (dx, dW, db)."""
    x, p = cache
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != (x.shape[0], p.W.shape[0]):
        raise ShapeError(
            f"fc grad shape {grad_out.shape} does not match cache "
            f"(batch {x.shape[0]}, out {p.W.shape[0]})"
        )
    dW = matmul(grad_out.T, x)
    db = grad_out.sum(axis=0)
    dx = matmul(grad_out, p.W)
    return dx, dW, db


# ---------------------------------------------------------------------------
# Batch normalization
# ---------------------------------------------------------------------------

@dataclass
class BatchNormParams:
    """Per-feature scale/shift plus running statistics for inference.

    Train-mode forward normalizes by the biased batch variance and folds the
    batch statistics into ``running_mean``/``running_var`` with
    ``new = momentum * old + (1 - momentum) * batch``.
    """

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.9
    epsilon: float = 1e-5


def batchnorm_init(n: int, momentum: float = 0.9, epsilon: float = 1e-5) -> BatchNormParams:
    if not 0.0 < momentum < 1.0:
        raise ConfigError(f"batchnorm momentum must be in (0, 1), got {momentum}")
    if epsilon <= 0.0:
        raise ConfigError(f"batchnorm epsilon must be positive, got {epsilon}")
    return BatchNormParams(
        gamma=np.ones(n),
        beta=np.zeros(n),
        running_mean=np.zeros(n),
        running_var=np.ones(n),
        momentum=momentum,
        epsilon=epsilon,
    )


def batchnorm_forward(x: np.ndarray, p: BatchNormParams, mode: str):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.gamma.shape[0]:
        raise ShapeError(f"batchnorm input shape {x.shape} incompatible with width {p.gamma.shape[0]}")
    if mode == "train":
        if x.shape[0] < 2:
            raise ShapeError(f"batchnorm train mode needs batch >= 2, got {x.shape[0]}")
        mean = x.mean(axis=0)
        var = x.var(axis=0)  # biased
        inv_std = 1.0 / np.sqrt(var + p.epsilon)
        xhat = (x - mean) * inv_std
        y = p.gamma * xhat + p.beta
        # In-place so that external views of the arrays stay valid.
        p.running_mean *= p.momentum
        p.running_mean += (1.0 - p.momentum) * mean
        p.running_var *= p.momentum
        p.running_var += (1.0 - p.momentum) * var
        return y, (xhat, inv_std, p.gamma)
    if mode == "infer":
        xhat = (x - p.running_mean) / np.sqrt(p.running_var + p.epsilon)
        return p.gamma * xhat + p.beta, None
    raise ConfigError(f"batchnorm mode must be 'train' or 'infer', got {mode!r}")


def batchnorm_backward(grad_out: np.ndarray, cache):
    """Returns (dx, dgamma, dbeta); cache must come from a train-mode forward."""
    if cache is None:
        raise ShapeError("batchnorm_backward needs a train-mode cache")
    xhat, inv_std, gamma = cache
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != xhat.shape:
        raise ShapeError(f"batchnorm grad shape {grad_out.shape} vs cache {xhat.shape}")
    n = xhat.shape[0]
    dgamma = (grad_out * xhat).sum(axis=0)
    dbeta = grad_out.sum(axis=0)
    dxhat = grad_out * gamma
    dx = (inv_std / n) * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# Dropout (inverted) and ReLU
# ---------------------------------------------------------------------------

def dropout_forward(x: np.ndarray, rate: float, mode: str, rng: RngState | None = None):
    """Inverted dropout.  Returns (y, mask); backward is ``grad * mask``.

    Train mode zeroes each entry with probability ``rate`` and scales the
    survivors by 1/(1-rate); infer mode is the identity (mask of ones).
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if mode == "infer" or rate == 0.0:
        return x, np.ones_like(x)
    if mode != "train":
        raise ConfigError(f"dropout mode must be 'train' or 'infer', got {mode!r}")
    if rng is None:
        raise ConfigError("dropout train mode needs an RngState")
    keep = rng.generator.random(x.shape) >= rate
    mask = keep / (1.0 - rate)
    return x * mask, mask


def dropout_backward(grad_out: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.asarray(grad_out, dtype=np.float64) * mask


def relu_forward(x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    return relu(x), x


def relu_backward(grad_out: np.ndarray, cache: np.ndarray) -> np.ndarray:
    return np.asarray(grad_out, dtype=np.float64) * (cache > 0)


# ---------------------------------------------------------------------------
# GRU
# ---------------------------------------------------------------------------

@dataclass
class GruParams:
    """Gated recurrent unit weights; W_* are (H, E), U_* are (H, H), b_* are (H,).

    Update rule (z gates the candidate):
        z = sigmoid(W_z x + U_z h + b_z)
        r = sigmoid(W_r x + U_r h + b_r)
        hcand = tanh(W_h x + U_h (r * h) + b_h)
        h' = (1 - z) * h + z * hcand
    """

    W_z: np.ndarray
    U_z: np.ndarray
    b_z: np.ndarray
    W_r: np.ndarray
    U_r: np.ndarray
    b_r: np.ndarray
    W_h: np.ndarray
    U_h: np.ndarray
    b_h: np.ndarray


GRU_FIELDS = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")


def gru_init(input_dim: int, hidden_dim: int, rng: RngState) -> GruParams:
    def w(name):
        return xavier_init(hidden_dim, input_dim, rng.child(name))

    def u(name):
        return xavier_init(hidden_dim, hidden_dim, rng.child(name))

    return GruParams(
        W_z=w("W_z"), U_z=u("U_z"), b_z=np.zeros(hidden_dim),
        W_r=w("W_r"), U_r=u("U_r"), b_r=np.zeros(hidden_dim),
        W_h=w("W_h"), U_h=u("U_h"), b_h=np.zeros(hidden_dim),
    )


def gru_zero_grads(p: GruParams) -> GruParams:
    return GruParams(**{f: np.zeros_like(getattr(p, f)) for f in GRU_FIELDS})


def gru_cell_forward(x_t: np.ndarray, h_prev: np.ndarray, p: GruParams):
    """One GRU step over a batch: x_t is (B, E), h_prev is (B, H)."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    if x_t.shape[1] != p.W_z.shape[1] or h_prev.shape[1] != p.U_z.shape[1]:
        raise ShapeError(
            f"gru shapes: x {x_t.shape}, h {h_prev.shape}, "
            f"W {p.W_z.shape}, U {p.U_z.shape}"
        )
    z = sigmoid(matmul(x_t, p.W_z.T) + matmul(h_prev, p.U_z.T) + p.b_z)
    r = sigmoid(matmul(x_t, p.W_r.T) + matmul(h_prev, p.U_r.T) + p.b_r)
    rh = r * h_prev
    hcand = tanh(matmul(x_t, p.W_h.T) + matmul(rh, p.U_h.T) + p.b_h)
    h_t = (1.0 - z) * h_prev + z * hcand
    return h_t, (x_t, h_prev, z, r, rh, hcand, p)


def gru_cell_backward(dh_t: np.ndarray, cache):
    """Returns (dx_t, dh_prev, grads: GruParams)."""
    x_t, h_prev, z, r, rh, hcand, p = cache
    dh_t = np.asarray(dh_t, dtype=np.float64)
    if dh_t.shape != h_prev.shape:
        raise ShapeError(f"gru grad shape {dh_t.shape} vs hidden {h_prev.shape}")

    dz = dh_t * (hcand - h_prev)
    dhcand = dh_t * z
    dh_prev = dh_t * (1.0 - z)

    da_h = dhcand * (1.0 - hcand * hcand)
    dW_h = matmul(da_h.T, x_t)
    dU_h = matmul(da_h.T, rh)
    db_h = da_h.sum(axis=0)
    drh = matmul(da_h, p.U_h)
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    da_r = dr * r * (1.0 - r)
    dW_r = matmul(da_r.T, x_t)
    dU_r = matmul(da_r.T, h_prev)
    db_r = da_r.sum(axis=0)

    da_z = dz * z * (1.0 - z)
    dW_z = matmul(da_z.T, x_t)
    dU_z = matmul(da_z.T, h_prev)
    db_z = da_z.sum(axis=0)

    dx_t = matmul(da_h, p.W_h) + matmul(da_r, p.W_r) + matmul(da_z, p.W_z)
    dh_prev = dh_prev + matmul(da_r, p.U_r) + matmul(da_z, p.U_z)

    grads = GruParams(
        W_z=dW_z, U_z=dU_z, b_z=db_z,
        W_r=dW_r, U_r=dU_r, b_r=db_r,
        W_h=dW_h, U_h=dU_h, b_h=db_h,
    )
    return dx_t, dh_prev, grads


def gru_sequence_forward(x_seq: np.ndarray, h0: np.ndarray, p: GruParams,
                         mask: np.ndarray | None = None):
    """Run a GRU over ``x_seq`` of shape (T, B, E) from initial state ``h0``.

    ``mask`` (T, B) marks live positions; where it is False the state is
    carried through unchanged (the computed update is discarded entirely, so
    each row is bit-identical to running its sequence alone, unpadded).
    Returns (h_final, caches) where caches feed :func:`gru_sequence_backward`.
    """
    x_seq = np.asarray(x_seq, dtype=np.float64)
    h = np.asarray(h0, dtype=np.float64)
    caches = []
    for t in range(x_seq.shape[0]):
        h_new, cell_cache = gru_cell_forward(x_seq[t], h, p)
        if mask is not None:
            m = mask[t][:, None]
            h_next = np.where(m, h_new, h)
        else:
            m = None
            h_next = h_new
        caches.append((cell_cache, m))
        h = h_next
    return h, caches


def gru_sequence_backward(dh_final: np.ndarray, caches, p: GruParams):
    """Backpropagate through an unrolled sequence.

    Returns (dx_seq, dh0, grads) with dx_seq of shape (T, B, E).
    """
    dh = np.asarray(dh_final, dtype=np.float64)
    grads = gru_zero_grads(p)
    dx_seq = []
    for cell_cache, m in reversed(caches):
        if m is not None:
            dh_live = np.where(m, dh, 0.0)
            dh_carry = np.where(m, 0.0, dh)
        else:
            dh_live = dh
            dh_carry = 0.0
        dx_t, dh_prev, g = gru_cell_backward(dh_live, cell_cache)
        for f in GRU_FIELDS:
            acc = getattr(grads, f)
            acc += getattr(g, f)
        dh = dh_prev + dh_carry
        dx_seq.append(dx_t)
    dx_seq.reverse()
    return np.stack(dx_seq), dh, grads


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean negative log-likelihood of integer ``labels`` under softmax.

    Returns (loss, grad_logits) with grad already averaged over the batch:
    (softmax - one_hot) / batch.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[0] < 1:
        raise ShapeError(f"logits must be (batch, classes), got {logits.shape}")
    if labels.shape != (logits.shape[0],):
        raise ShapeError(f"labels shape {labels.shape} vs batch {logits.shape[0]}")
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ShapeError(
            f"label out of range [0, {logits.shape[1]}): "
            f"min {labels.min()}, max {labels.max()}"
        )
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_z - shifted[np.arange(n), labels]))
    grad = softmax(logits)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean over all entries of (pred - target)^2; grad is 2(pred-target)/count."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"mse shapes differ: {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size


# ---------------------------------------------------------------------------
# Finite-difference gradient check
# ---------------------------------------------------------------------------

def grad_check(loss_and_grads, tensors: dict[str, np.ndarray], eps: float = 1e-5) -> float:
    """Central-difference check of analytic gradients.

    ``loss_and_grads`` is a zero-argument callable evaluating the (pure,
    deterministic) function at the *current* values of ``tensors`` and
    returning ``(loss, grads)`` where ``grads`` maps the same keys to arrays
    of the same shapes.  Entries of ``tensors`` are perturbed in place by
    ``eps`` and restored.  Returns the maximum relative error
    ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)``.
    """
    _, grads = loss_and_grads()
    max_err = 0.0
    for name, t in tensors.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != t.shape:
            raise ShapeError(f"gradient {name} shape {g.shape} vs tensor {t.shape}")
        flat = t.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lp, _ = loss_and_grads()
            flat[i] = orig - eps
            lm, _ = loss_and_grads()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * eps)
            err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1e-8)
            if err > max_err:
                max_err = err
    return max_err
