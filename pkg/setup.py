"""Build script: compiles the optional port-objective kernel.

The extension is marked optional; if no compiler (or Cython) is available the
package installs anyway and falls back to the NumPy implementation at import.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "mpmp._portgrid",
        ["src/mpmp/_portgrid.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
