import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is optional: the package falls back to the numpy
# implementation in strata_lab._kernels.fallback when the build is skipped.
ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "strata_lab._kernels._native",
                sources=["src/strata_lab/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
