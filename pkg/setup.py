"""Build script for the optional compiled likelihood kernel.

The package is pure Python plus one Cython extension for the hot
tomography loop.  If Cython or a C compiler is unavailable the build
falls back to no extensions and the package uses the NumPy kernel.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pauliproc._mle_core",
                ["src/pauliproc/_mle_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
