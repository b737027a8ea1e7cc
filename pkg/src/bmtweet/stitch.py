"""Cross-stitch units: learned linear mixing of two task branches.

A unit holds a 2x2 mixing matrix ``alpha``; row 0 produces the output fed to
the classification branch, row 1 the output fed to the regression branch, and
columns index the two incoming activations.  By default one scalar per
``alpha`` entry is shared across all channels of the (equal-width) branch
activations; per-channel mixing stores one 2x2 matrix per channel instead
(``alpha`` shape (2, 2, width)) and is selected at construction time.

The entries are free parameters: nothing constrains rows to sum to one, and
training applies plain gradient steps to them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError

__all__ = ["CrossStitchUnit", "init_stitch", "stitch_forward", "stitch_backward"]


@dataclass
class CrossStitchUnit:
    """Mixing weights: shape (2, 2) shared across channels, or (2, 2, width)."""

    alpha: np.ndarray

    @property
    def per_channel(self) -> bool:
        return self.alpha.ndim == 3


def init_stitch(mode: str = "biased", s: float = 0.9, d: float = 0.1,
                width: int | None = None) -> CrossStitchUnit:
    """Build a unit: ``identity`` passes branches through untouched,
    ``biased`` starts at [[s, d], [d, s]] (defaults favor the own branch).

    ``width`` switches to per-channel mixing with that many channels.
    """
    if mode == "identity":
        base = np.eye(2)
    elif mode == "biased":
        if not (np.isfinite(s) and np.isfinite(d)):
            raise ConfigError(f"stitch init values must be finite, got s={s}, d={d}")
        base = np.array([[s, d], [d, s]], dtype=np.float64)
    else:
        raise ConfigError(f"stitch init mode must be 'identity' or 'biased', got {mode!r}")
    if width is not None:
        if width < 1:
            raise ConfigError(f"stitch width must be >= 1, got {width}")
        base = np.repeat(base[:, :, None], width, axis=2)
    return CrossStitchUnit(alpha=base)


def _check_inputs(x_a: np.ndarray, x_b: np.ndarray, u: CrossStitchUnit) -> None:
    if x_a.shape != x_b.shape:
        raise ShapeError(f"stitch inputs differ: {x_a.shape} vs {x_b.shape}")
    if u.per_channel and u.alpha.shape[2] != x_a.shape[1]:
        raise ShapeError(
            f"per-channel stitch width {u.alpha.shape[2]} vs activations {x_a.shape}"
        )


def stitch_forward(x_a: np.ndarray, x_b: np.ndarray, u: CrossStitchUnit):
    """Mix the two branch activations; returns ((y_a, y_b), cache).

    y_a = alpha[0,0] * x_a + alpha[0,1] * x_b
    y_b = alpha[1,0] * x_a + alpha[1,1] * x_b
    applied channel-wise (scalar entries broadcast over all channels).
    """
    x_a = np.asarray(x_a, dtype=np.float64)
    x_b = np.asarray(x_b, dtype=np.float64)
    _check_inputs(x_a, x_b, u)
    a = u.alpha
    y_a = a[0, 0] * x_a + a[0, 1] * x_b
    y_b = a[1, 0] * x_a + a[1, 1] * x_b
    return (y_a, y_b), (x_a, x_b, u)


def stitch_backward(grad_a: np.ndarray, grad_b: np.ndarray, cache):
    """Returns (dx_a, dx_b, d_alpha) for a matching forward cache."""
    x_a, x_b, u = cache
    grad_a = np.asarray(grad_a, dtype=np.float64)
    grad_b = np.asarray(grad_b, dtype=np.float64)
    if grad_a.shape != x_a.shape or grad_b.shape != x_b.shape:
        raise ShapeError(
            f"stitch grads {grad_a.shape}/{grad_b.shape} vs cache {x_a.shape}"
        )
    a = u.alpha
    dx_a = a[0, 0] * grad_a + a[1, 0] * grad_b
    dx_b = a[0, 1] * grad_a + a[1, 1] * grad_b
    if u.per_channel:
        d_alpha = np.stack([
            np.stack([(grad_a * x_a).sum(axis=0), (grad_a * x_b).sum(axis=0)]),
            np.stack([(grad_b * x_a).sum(axis=0), (grad_b * x_b).sum(axis=0)]),
        ])
    else:
        d_alpha = np.array([
            [(grad_a * x_a).sum(), (grad_a * x_b).sum()],
            [(grad_b * x_a).sum(), (grad_b * x_b).sum()],
        ])
    return dx_a, dx_b, d_alpha
