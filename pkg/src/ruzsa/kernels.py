"""Hot inner loops, compiled when available.

The Cython extension ``ruzsa._ckernels`` is used if it was built at install
time; otherwise the numpy fallback in ``ruzsa._pykernels`` is used.  Both
expose the same three functions, so callers never need to know which one is
active.  ``use_backend`` switches at runtime (tests and the benchmark use it).
"""
from __future__ import annotations

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _BACKENDS.get("compiled", _pykernels)


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend() -> str:
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = _BACKENDS[name]


def cyclic_convolve_naive(p, q, moduli) -> np.ndarray:
    return _active.cyclic_convolve_naive(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(q, dtype=np.float64),
        tuple(int(m) for m in moduli),
    )


def entropy_nats(p) -> float:
    return float(_active.entropy_nats(np.ascontiguousarray(np.ravel(p), dtype=np.float64)))


def pav_decreasing(y, w=None) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.ascontiguousarray(w, dtype=np.float64)
    if y.size == 0:
        return y.copy()
    return np.asarray(_active.pav_decreasing(y, w))
