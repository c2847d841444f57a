"""Backend selection for the likelihood-maximization kernel.

Prefers the compiled Cython extension and falls back to the NumPy
implementation when the extension was not built.  Set the environment
variable ``PAULIPROC_MLE_BACKEND`` to ``numpy`` or ``cython`` to force a
backend (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _mle_numpy

_forced = os.environ.get("PAULIPROC_MLE_BACKEND", "").strip().lower()

if _forced == "numpy":
    iterate = _mle_numpy.iterate
    BACKEND = "numpy"
else:
    try:
        from . import _mle_core

        iterate = _mle_core.iterate
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "PAULIPROC_MLE_BACKEND=cython but the compiled extension is not available"
            ) from None
        iterate = _mle_numpy.iterate
        BACKEND = "numpy"
