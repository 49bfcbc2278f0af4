"""Shot-simulation kernels: compiled core with a pure-numpy fallback.

The compiled extension is preferred when it imports cleanly; set
``RBSIM_PURE_PYTHON=1`` to force the numpy implementation.  Both expose the
same ``run_shots`` contract and consume identical pre-drawn noise arrays, so
they agree up to floating-point roundoff (see ``tests/test_kernels.py``).
"""

import os

from . import pure


def available_kernels():
    """Names of the kernels importable in this environment."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get_kernel(name):
    """Fetch a kernel module by name ('cython' or 'python')."""
    if name == "python":
        return pure
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel {name!r}")


def _select():
    if os.environ.get("RBSIM_PURE_PYTHON"):
        return pure
    try:
        from . import _core

        return _core
    except ImportError:
        return pure


active = _select()
KERNEL_NAME = active.KERNEL_NAME
run_shots = active.run_shots
