"""Hot-kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure NumPy
fallback is always available. Set ``ADVSCENE_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from advscene.kernels import pure

_FORCE_PURE = os.environ.get("ADVSCENE_PURE_PYTHON", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from advscene.kernels import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure
else:
    _impl = pure

BACKEND = _impl.BACKEND_NAME

rollout_unicycle = _impl.rollout_unicycle
smooth_pair_gap = _impl.smooth_pair_gap
guidance_eval = _impl.guidance_eval


def available_backends():
    """Name -> module for every importable backend (for benchmarks/tests)."""
    out = {"pure": pure}
    try:
        from advscene.kernels import _speedups  # type: ignore[attr-defined]

        out["cython"] = _speedups
    except ImportError:
        pass
    return out
