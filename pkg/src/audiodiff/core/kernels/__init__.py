"""Hot conv kernels with backend selection at import.

The compiled Cython kernels are preferred when present; AUDIODIFF_KERNELS
forces a backend ("numpy" or "cython").  Both backends implement the same
three functions and agree to float rounding; the benchmark script under
benchmarks/ compares their speed.
"""

from __future__ import annotations

import os

from . import numpy_impl

_requested = os.environ.get("AUDIODIFF_KERNELS", "auto").lower()

if _requested == "numpy":
    _impl = numpy_impl
elif _requested in ("auto", "cython"):
    try:
        from . import _convkern as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "AUDIODIFF_KERNELS=cython but the compiled extension is not "
                "available; reinstall the package or use AUDIODIFF_KERNELS=numpy"
            )
        _impl = numpy_impl
else:
    raise ValueError(f"unknown AUDIODIFF_KERNELS value: {_requested!r}")

BACKEND: str = _impl.BACKEND
conv1d_forward = _impl.conv1d_forward
conv1d_backward_input = _impl.conv1d_backward_input
conv1d_backward_weight = _impl.conv1d_backward_weight


def available_backends() -> list[str]:
    out = ["numpy"]
    try:
        from . import _convkern  # noqa: F401

        out.append("cython")
    except ImportError:
        pass
    return out


def get_impl(name: str):
    if name == "numpy":
        return numpy_impl
    if name == "cython":
        from . import _convkern

        return _convkern
    raise ValueError(f"unknown kernel backend: {name!r}")
