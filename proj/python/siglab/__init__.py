"""Contrastive-loss laboratory: pairwise sigmoid vs softmax on synthetic pairs.

The heavy lifting lives in the compiled ``_core`` module; this package
re-exports its surface. Embedding batches are plain lists of rows, run
configuration uses the same dotted keys as the text config files.
"""

try:
    from ._core import (  # installed layout: _core sits inside the package
        DEFAULT_BIAS,
        DEFAULT_T_PRIME,
        SiglabError,
        chunked_sigmoid_loss,
        effective_config,
        l2_normalize_rows,
        log_sigmoid,
        sigmoid_loss,
        sigmoid_loss_grads,
        softmax_loss,
        softmax_loss_grads,
        train_and_eval,
    )
except ImportError:  # build-tree layout: _core next to the package on sys.path
    from _core import (
        DEFAULT_BIAS,
        DEFAULT_T_PRIME,
        SiglabError,
        chunked_sigmoid_loss,
        effective_config,
        l2_normalize_rows,
        log_sigmoid,
        sigmoid_loss,
        sigmoid_loss_grads,
        softmax_loss,
        softmax_loss_grads,
        train_and_eval,
    )

__all__ = [
    "DEFAULT_BIAS",
    "DEFAULT_T_PRIME",
    "SiglabError",
    "chunked_sigmoid_loss",
    "effective_config",
    "l2_normalize_rows",
    "log_sigmoid",
    "sigmoid_loss",
    "sigmoid_loss_grads",
    "softmax_loss",
    "softmax_loss_grads",
    "train_and_eval",
]
