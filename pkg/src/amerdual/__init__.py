"""Exact-arithmetic pricing engine for American options on finite event trees.

Computes superhedging prices under semi-static trading, the matching dual
values over calibrated martingale measures (strong, weak and randomized
stopping formulations), explains pricing/hedging duality gaps, and rebuilds
markets in which the gap closes by letting the statically traded options
trade dynamically.
"""

from .scalar import FLOAT, RATIONAL

__all__ = ["RATIONAL", "FLOAT"]
__version__ = "0.1.0"
