"""Kernel dispatch.

The compiled numba kernels are used by default. Setting the environment
variable ``STOCHSPREAD_DISABLE_JIT`` to ``1``/``true``/``yes`` before the
package is imported selects the pure numpy fallback instead; so does a
missing numba installation.
"""
import os

_FLAG = os.environ.get("STOCHSPREAD_DISABLE_JIT", "").strip().lower()

USE_JIT = _FLAG not in {"1", "true", "yes", "on"}

if USE_JIT:
    try:
        from . import jit as backend
    except ImportError:  # pragma: no cover - numba missing
        USE_JIT = False
if not USE_JIT:
    from . import reference as backend

BACKEND = "numba" if USE_JIT else "numpy"

kalman_filter = backend.kalman_filter
rts_smoother = backend.rts_smoother
loglik_batch = backend.loglik_batch
rule_positions = backend.rule_positions
max_drawdown = backend.max_drawdown

__all__ = [
    "BACKEND",
    "USE_JIT",
    "kalman_filter",
    "rts_smoother",
    "loglik_batch",
    "rule_positions",
    "max_drawdown",
]
