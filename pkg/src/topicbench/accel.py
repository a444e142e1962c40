"""Optional numba acceleration for the hot numeric kernels.

Set ``TOPICBENCH_NUMBA=0`` to run every kernel as plain Python/numpy.
The kernel bodies are written so that both paths execute the exact same
arithmetic; the flag only controls whether numba compiles them.
"""

import os


def jit_wanted() -> bool:
    flag = os.environ.get("TOPICBENCH_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


JIT_ENABLED = False
if jit_wanted():
    try:
        from numba import njit as _numba_njit

        JIT_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False


def njit(*args, **kwargs):
    """numba.njit when enabled, identity decorator otherwise."""
    if JIT_ENABLED:
        return _numba_njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def decorate(fn):
        return fn

    return decorate
