"""Join kernel backend selection.

The BGP evaluator spends nearly all of its time in multiset hash joins over
integer-encoded binding rows. Those run either in the compiled extension
(`_cjoin`, built from Cython) or in the pure-Python fallback (`_pyjoin`).
The compiled backend is preferred when the extension imported; set
LINKALIGN_KERNEL=python or LINKALIGN_KERNEL=compiled to force one side
(the benchmark and the parity tests do).
"""

from __future__ import annotations

import os

_forced = os.environ.get("LINKALIGN_KERNEL", "").strip().lower()

if _forced == "python":
    from . import _pyjoin as _impl

    BACKEND = "python"
elif _forced == "compiled":
    from . import _cjoin as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
else:
    try:
        from . import _cjoin as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _pyjoin as _impl

        BACKEND = "python"

hash_join = _impl.hash_join


def get_backend(name: str | None = None):
    """Return (backend_name, hash_join) for an explicit backend, or the default."""
    if name is None:
        return BACKEND, hash_join
    if name == "python":
        from . import _pyjoin

        return "python", _pyjoin.hash_join
    if name == "compiled":
        from . import _cjoin

        return "compiled", _cjoin.hash_join
    raise ValueError(f"unknown kernel backend {name!r}")
