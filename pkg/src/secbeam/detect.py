"""Nearest-signature search with a compiled fast path.

``ml_argmin`` dispatches to the Cython kernel when the extension built,
falling back to a pure-numpy implementation otherwise.  Setting the
environment variable ``SECBEAM_PURE_PYTHON=1`` before import forces the
fallback (used by the tests and the benchmark).  Both paths evaluate the
same squared-distance expression, so results agree except on exact
floating-point ties, which both resolve to the lowest index.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["ml_argmin", "ml_argmin_numpy", "ml_argmin_compiled", "using_compiled_kernel"]

try:
    from ._mlkernel import ml_argmin as _compiled_impl
except ImportError:
    _compiled_impl = None

_FORCE_PURE = os.environ.get("SECBEAM_PURE_PYTHON", "") == "1"

_CHUNK = 4096


def ml_argmin_numpy(received, signatures):
    """Pure-numpy nearest signature per received row (chunked broadcast)."""
    received = np.asarray(received, dtype=complex)
    signatures = np.asarray(signatures, dtype=complex)
    n = received.shape[0]
    out = np.empty(n, dtype=np.int64)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        diff = received[lo:hi, None, :] - signatures[None, :, :]
        d2 = np.abs(diff) ** 2
        out[lo:hi] = d2.sum(axis=2).argmin(axis=1)
    return out


def ml_argmin_compiled(received, signatures):
    """Compiled kernel; raises if the extension is unavailable."""
    if _compiled_impl is None:
        raise RuntimeError("compiled detection kernel is not available")
    received = np.ascontiguousarray(received, dtype=complex)
    signatures = np.ascontiguousarray(signatures, dtype=complex)
    return _compiled_impl(received, signatures)


def using_compiled_kernel():
    return _compiled_impl is not None and not _FORCE_PURE


if _compiled_impl is not None and not _FORCE_PURE:
    ml_argmin = ml_argmin_compiled
else:
    ml_argmin = ml_argmin_numpy
