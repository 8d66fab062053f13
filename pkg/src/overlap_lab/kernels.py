"""Backend selection for the covering-word kernel.

The compiled extension is used when it was built; setting
``OVERLAP_LAB_PURE=1`` forces the pure-Python version.
"""

import os

from . import _pykernels

python_cover_profile = _pykernels.cover_profile

try:
    from ._kernels import cover_profile as compiled_cover_profile
except ImportError:  # extension not built
    compiled_cover_profile = None

if compiled_cover_profile is not None and not os.environ.get("OVERLAP_LAB_PURE"):
    cover_profile = compiled_cover_profile
    BACKEND = "cython"
else:
    cover_profile = python_cover_profile
    BACKEND = "python"
