"""Selection between the compiled simulation kernel and the pure-Python
reference loop.

The compiled extension is optional; when it is importable it is used for
the registered hot strategies unless BANDITLB_BACKEND=pure (or an explicit
``backend=`` argument) forces the reference loop.  Both backends consume
the same uniform streams through the same transforms, so they produce
bit-identical run records.
"""

import os

try:
    from . import _kernel
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None

__all__ = ["have_kernel", "kernel", "resolve_backend", "KERNEL_STRATEGY_CODES"]

#: strategies with a fused compiled loop
KERNEL_STRATEGY_CODES = {
    "uniform": 0,
    "ucb": 1,
    "kl_ucb": 2,
    "thompson_bernoulli": 3,
    "known_mu_star": 4,
}


def have_kernel() -> bool:
    return _kernel is not None


def kernel():
    return _kernel


def resolve_backend(override: str | None, strategy_id: str) -> str:
    """'compiled' or 'pure' for this run.

    ``override`` (or the BANDITLB_BACKEND environment variable) may be
    'auto', 'compiled' or 'pure'.  Strategies without a fused kernel loop
    always run pure under 'auto'.
    """
    mode = override or os.environ.get("BANDITLB_BACKEND", "auto")
    if mode == "auto":
        if _kernel is not None and strategy_id in KERNEL_STRATEGY_CODES:
            return "compiled"
        return "pure"
    if mode == "compiled":
        if _kernel is None:
            raise RuntimeError("compiled backend requested but the extension is not built")
        if strategy_id not in KERNEL_STRATEGY_CODES:
            raise ValueError(f"strategy {strategy_id!r} has no compiled loop")
        return "compiled"
    if mode == "pure":
        return "pure"
    raise ValueError(f"unknown backend {mode!r} (use auto, compiled or pure)")
