"""Blackmarket-tweet detection toolkit.

A small, fully deterministic stack: hand-written layers and losses on a
float64 numpy substrate, a two-branch multitask network joined by
cross-stitch units, a character-level Bi-GRU tweet encoder pre-trained on
hashtag prediction, twelve tweet content features, a synthetic dataset
generator, and a stratified cross-validation harness.
"""

__version__ = "0.1.0"
