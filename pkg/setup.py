"""Build script for the optional compiled simulation core.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so the extension is marked optional: a failed
compile degrades to the pure-Python build instead of aborting the install.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    import numpy

    npyrandom_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext = Extension(
        "tailgap._sim_core",
        sources=["src/tailgap/_sim_core.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the kernel arithmetic bit-identical to the
        # numpy fallback (no FMA contraction of a*b+c).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
