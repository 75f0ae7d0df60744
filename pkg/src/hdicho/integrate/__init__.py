"""Integrator backend selection: compiled core with pure-Python fallback.

The compiled extension and the pure stepper implement the same
Dormand-Prince 5(4) scheme.  Selection happens once at import:

* ``HDICHO_BACKEND=compiled`` requires the extension (ImportError if absent),
* ``HDICHO_BACKEND=python`` forces the fallback,
* unset/``auto`` prefers the extension when it imported cleanly.
"""

from __future__ import annotations

import os

from . import _stepper_py as _pure

try:
    from . import _stepper as _compiled
except ImportError:
    _compiled = None

_choice = os.environ.get("HDICHO_BACKEND", "auto").lower()
if _choice == "python":
    _active = _pure
elif _choice == "compiled":
    if _compiled is None:
        raise ImportError(
            "HDICHO_BACKEND=compiled but the extension module is not built; "
            "reinstall with a working C toolchain or unset HDICHO_BACKEND"
        )
    _active = _compiled
elif _choice == "auto":
    _active = _compiled if _compiled is not None else _pure
else:
    raise ValueError(f"unknown HDICHO_BACKEND value {_choice!r}")

integrate_matrix = _active.integrate_matrix


def backend_name() -> str:
    """Name of the stepper backend in use ("compiled" or "python")."""
    return _active.BACKEND


def available_backends() -> dict:
    """All importable backends, keyed by name (for tests and benchmarks)."""
    out = {"python": _pure.integrate_matrix}
    if _compiled is not None:
        out["compiled"] = _compiled.integrate_matrix
    return out
