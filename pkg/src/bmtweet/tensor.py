"""Dense float64 linear algebra and seeded randomness for the whole package.

All tensors are plain ``numpy.ndarray`` objects with ``dtype=float64``;
matrices are 2-D, per-feature vectors are 1-D.  Two properties matter more
than raw speed here and shape everything in this module:

* Bit-reproducibility.  ``matmul`` is evaluated with ``numpy.einsum`` in
  non-optimized mode, which accumulates each output element with a fixed
  sequential summation order.  The result is therefore independent of batch
  composition (row ``i`` of a batched product is bitwise equal to the product
  computed from row ``i`` alone) and of any BLAS threading or blocking
  choices.  The networks in this package are tiny, so the speed cost is
  irrelevant next to the testability it buys.

* Explicit randomness.  Every stochastic operation takes an :class:`RngState`.
  States are counter-based (Philox) and support key-splitting by name, so
  independent child streams can be carved out deterministically: drawing from
  one stream never shifts another, and the same named stream yields the same
  values no matter what other streams exist in the run.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import ShapeError

__all__ = [
    "RngState",
    "matmul",
    "xavier_init",
    "sigmoid",
    "tanh",
    "relu",
    "add",
    "mul",
    "scale",
    "assert_finite",
]


class RngState:
    """Deterministic random stream with named key-splitting.

    A state is identified by ``(seed, path)``.  The 128-bit Philox key is
    derived by hashing that identity, so equal seeds reproduce the exact same
    stream on every platform, and child streams obtained via :meth:`child`
    are mutually independent by construction.

    Draw methods are exposed through :attr:`generator`, a
    ``numpy.random.Generator``.  Consuming draws advances this state; create
    children instead of sharing one stream across unrelated call sites.
    """

    def __init__(self, seed: int, _path: tuple = ()):
        self.seed = int(seed)
        self.path = _path
        self._generator: np.random.Generator | None = None

    def child(self, *parts: str | int) -> "RngState":
        """Derive an independent stream named by ``parts`` under this one."""
        return RngState(self.seed, self.path + tuple(parts))

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            # Path parts never contain the separator (names are short
            # identifiers and integers), so the encoding is injective.
            ident = f"{self.seed}\x1f" + "\x1f".join(str(p) for p in self.path)
            digest = hashlib.sha256(ident.encode("utf-8")).digest()
            key = np.frombuffer(digest[:16], dtype=np.uint64)
            self._generator = np.random.Generator(np.random.Philox(key=key))
        return self._generator

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, path={self.path!r})"


def _as2d(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def matmul(a, b) -> np.ndarray:
    """Matrix product with a fixed, batch-independent summation order."""
    a = _as2d(a, "a")
    b = _as2d(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return np.einsum("ij,jk->ik", a, b, optimize=False)


def xavier_init(rows: int, cols: int, rng: RngState) -> np.ndarray:
    """Glorot-uniform matrix: entries uniform in +-sqrt(6 / (rows + cols))."""
    if rows < 1 or cols < 1:
        raise ShapeError(f"xavier_init needs positive dims, got ({rows}, {cols})")
    limit = math.sqrt(6.0 / (rows + cols))
    return rng.generator.uniform(-limit, limit, size=(rows, cols))


def sigmoid(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=np.float64))


def relu(x) -> np.ndarray:
    return np.maximum(0.0, np.asarray(x, dtype=np.float64))


def _check_same_shape(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op} shape mismatch: {a.shape} vs {b.shape}")


def add(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b, "add")
    return a + b


def mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b, "mul")
    return a * b


def scale(a, s: float) -> np.ndarray:
    return np.asarray(a, dtype=np.float64) * float(s)


def assert_finite(x, name: str = "tensor") -> np.ndarray:
    """Raise if any entry is NaN or infinite; returns the input unchanged."""
    x = np.asarray(x)
    if not np.isfinite(x).all():
        raise FloatingPointError(f"{name} contains non-finite entries")
    return x
