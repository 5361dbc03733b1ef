"""Backend selection for the simulation core.

Two interchangeable cores exist: the pure-Python reference
(_kernel_py) and a compiled Cython twin (_kernel_cy) built at install
time.  They are observationally identical, so the choice only affects
speed.  The compiled core is preferred when present; set
DAGLEDGER_BACKEND=python or DAGLEDGER_BACKEND=compiled to force one.
"""

import os

from . import _kernel_py

_BACKENDS = {"python": _kernel_py.SimCore}

try:
    from . import _kernel_cy
except ImportError:
    _kernel_cy = None
else:
    _BACKENDS["compiled"] = _kernel_cy.SimCore


def available_backends():
    return tuple(sorted(_BACKENDS))


def default_backend():
    return "compiled" if "compiled" in _BACKENDS else "python"


def make_core(n_miners, alpha, k, max_blocks, max_txs, backend=None):
    name = backend or os.environ.get("DAGLEDGER_BACKEND") or default_backend()
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; have {available_backends()}"
        )
    return _BACKENDS[name](n_miners, alpha, k, max_blocks, max_txs)
