"""Build script: compiles the optional kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing compiler or Cython only costs speed. Set
KINECOACH_NO_EXT=1 to skip the build explicitly.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KINECOACH_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "kinecoach.kernels._ckernels",
                    ["src/kinecoach/kernels/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no -ffast-math: the fallback parity tests assume IEEE semantics
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
