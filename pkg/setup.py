import os

from setuptools import setup

# The compiled kernel is an optimisation, not a requirement: set
# BANDITLB_NO_EXT=1 to install the pure-Python package only.  The
# simulator selects whichever backend is importable at run time.
ext_modules = []
if not os.environ.get("BANDITLB_NO_EXT"):
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "banditlb._kernel",
                ["src/banditlb/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
