"""Iteration kernels with a compiled backend and a numpy fallback.

The compiled extension (``_fast``) is used when importable. Set
``OVERTON_KERNELS=pure`` to force the fallback, or ``OVERTON_KERNELS=compiled``
to fail loudly when the extension is missing. Both backends expose the same
functions and produce bit-identical results.
"""

import importlib
import os

from . import _pure

_choice = os.environ.get("OVERTON_KERNELS", "auto").lower()
if _choice not in ("auto", "pure", "compiled"):
    raise ImportError(f"OVERTON_KERNELS must be auto, pure or compiled, got {_choice!r}")

_fast = None
if _choice != "pure":
    try:
        _fast = importlib.import_module("._fast", __name__)
    except ImportError:
        if _choice == "compiled":
            raise

backend = _fast if _fast is not None else _pure
BACKEND = "compiled" if _fast is not None else "pure"

splitmix_u64 = backend.splitmix_u64
splitmix_uniforms = backend.splitmix_uniforms
hk_run = backend.hk_run
dw_run = backend.dw_run
weighted_run = backend.weighted_run

ATTRACTIVE = _pure.ATTRACTIVE
REPULSIVE = _pure.REPULSIVE
ATTRACTIVE_REPULSIVE = _pure.ATTRACTIVE_REPULSIVE

__all__ = [
    "BACKEND", "backend", "splitmix_u64", "splitmix_uniforms", "hk_run",
    "dw_run", "weighted_run", "ATTRACTIVE", "REPULSIVE", "ATTRACTIVE_REPULSIVE",
]
