"""Backend selection for the hot kernels.

GWBOOT_BACKEND=numba|numpy picks the implementation (default: numba when
importable, else numpy).  GWBOOT_THREADS caps numba's parallelism; results
never depend on it because all randomness is address-based and reductions
are integer-valued.
"""

import os
import warnings

from .hashref import mix2, mix64, stream_key, u01

__all__ = ["impl", "BACKEND", "get_impl", "mix2", "mix64", "stream_key", "u01"]


def _requested_backend() -> str:
    name = os.environ.get("GWBOOT_BACKEND", "").strip().lower()
    if name in ("", "numba", "numpy"):
        return name or "numba"
    warnings.warn(f"GWBOOT_BACKEND={name!r} not recognised; using numba", stacklevel=2)
    return "numba"


def _requested_threads():
    raw = os.environ.get("GWBOOT_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"GWBOOT_THREADS={raw!r} is not an integer; ignored", stacklevel=2)
        return None
    return max(1, n)


def _load():
    backend = _requested_backend()
    threads = _requested_threads()
    if backend == "numba":
        if threads is not None:
            os.environ.setdefault("NUMBA_NUM_THREADS", str(threads))
        # the TBB version probe is irrelevant here; the workqueue threading
        # layer is fine (targeted filter: numba warns lazily at first
        # parallel compile, after this import)
        warnings.filterwarnings("ignore", message=".*TBB_INTERFACE_VERSION.*")
        try:
            import numba
        except ImportError:
            warnings.warn("numba is not importable; falling back to the numpy backend",
                          stacklevel=2)
            from . import numpy_impl
            return numpy_impl, "numpy"
        if threads is not None:
            numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
        from . import numba_impl
        return numba_impl, "numba"
    from . import numpy_impl
    return numpy_impl, "numpy"


impl, BACKEND = _load()


def get_impl(name: str):
    """Load a backend module by name (used by parity tests and benchmarks)."""
    if name == "numba":
        from . import numba_impl
        return numba_impl
    if name == "numpy":
        from . import numpy_impl
        return numpy_impl
    raise ValueError(f"unknown backend {name!r}")
