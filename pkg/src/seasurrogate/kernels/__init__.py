"""Selects the compiled kernels when available, else the numpy fallback.

Set ``SEASURROGATE_BACKEND=python`` to force the fallback, or call
:func:`use` at runtime.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = None


def available():
    return sorted(_BACKENDS)


def use(name):
    """Activate a backend by name ("python" or "cython")."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available()}")
    _active = _BACKENDS[name]
    return _active


def backend():
    global _active
    if _active is None:
        wanted = os.environ.get("SEASURROGATE_BACKEND")
        if wanted:
            use(wanted)
        else:
            _active = _ckernels if _ckernels is not None else _pykernels
    return _active
