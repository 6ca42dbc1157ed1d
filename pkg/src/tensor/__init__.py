"""
Minimal dense tensor library with reverse-mode automatic differentiation.
"""

from .gradcheck import finite_diff_check
from .ops import (
    add,
    cross_entropy_ls,
    dropout,
    embedding,
    layer_norm,
    log_softmax,
    matmul,
    merge_heads,
    mul,
    relu,
    reshape,
    scale,
    softmax,
    split_heads,
    transpose,
)
from .ops import sum as sum_all
from .tensor import Graph, Tensor, active_graph, backward

__all__ = [
    "Graph",
    "Tensor",
    "active_graph",
    "add",
    "backward",
    "cross_entropy_ls",
    "dropout",
    "embedding",
    "finite_diff_check",
    "layer_norm",
    "log_softmax",
    "matmul",
    "merge_heads",
    "mul",
    "relu",
    "reshape",
    "scale",
    "softmax",
    "split_heads",
    "sum_all",
    "transpose",
]
