import os
import sys

import numpy as np
from setuptools import Extension, setup

# The compiled conv kernels are an optional speedup; the package falls back to
# the numpy implementation when the extension is absent (AUDIODIFF_NO_EXT=1
# skips the build entirely).
ext_modules = []
if os.environ.get("AUDIODIFF_NO_EXT", "0") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "audiodiff.core.kernels._convkern",
                    ["src/audiodiff/core/kernels/_convkern.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fopenmp"],
                    extra_link_args=["-fopenmp"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover
        print(f"audiodiff: skipping compiled kernels ({exc})", file=sys.stderr)
        ext_modules = []

setup(ext_modules=ext_modules)
