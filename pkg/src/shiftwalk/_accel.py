"""Switch between numba-compiled kernels and the pure numpy fallback.

Set ``SHIFTWALK_NUMBA=0`` before import to force the numpy code paths.
``SHIFTWALK_THREADS`` sets the default worker count for parallel kernels.
"""
import os

_flag = os.environ.get("SHIFTWALK_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if USE_NUMBA:
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; workqueue is always available
        numba.config.THREADING_LAYER = "workqueue"
    njit = numba.njit
    prange = numba.prange
else:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def default_threads():
    """Worker count from ``SHIFTWALK_THREADS``, else the CPU count."""
    val = os.environ.get("SHIFTWALK_THREADS")
    if val:
        try:
            n = int(val)
        except ValueError:
            n = 0
        if n > 0:
            return n
    return os.cpu_count() or 1


def set_threads(n):
    """Cap the numba thread pool (no-op for the numpy backend)."""
    if n is None:
        n = default_threads()
    if USE_NUMBA:
        n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
    return n
