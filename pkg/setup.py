"""Build script for the optional compiled kernel.

The package is fully functional without the extension; the portable
NumPy backend is selected automatically when the build is unavailable.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "nestedmz._kernels._speedups",
                ["src/nestedmz/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
