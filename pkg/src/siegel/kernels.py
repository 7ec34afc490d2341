"""Backend selection for the hot loops.

The compiled extension ``siegel._ckernels`` is used when importable; set
``SIEGEL_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SIEGEL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

BLASCHKE = _pykernels.BLASCHKE
ARNOLD = _pykernels.ARNOLD

recurse = _impl.recurse
circle_displacements = _impl.circle_displacements
blaschke_orbit = _impl.blaschke_orbit
arnold_orbit = _impl.arnold_orbit


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
