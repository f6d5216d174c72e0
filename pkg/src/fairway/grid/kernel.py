"""Backend selection for the grid kernel.

The compiled extension is used when it imports; otherwise the pure-Python
reference runs. Set ``FAIRWAY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

HAVE_EXTENSION = _ckernel is not None

_BACKENDS = {"python": _pykernel.simulate}
if HAVE_EXTENSION:
    _BACKENDS["cython"] = _ckernel.simulate


def default_backend() -> str:
    if os.environ.get("FAIRWAY_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return "cython" if HAVE_EXTENSION else "python"


def get_simulate(backend: str = "auto"):
    if backend == "auto":
        backend = default_backend()
    try:
        return _BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} unavailable; have {sorted(_BACKENDS)}") from None
