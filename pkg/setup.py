import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "secbeam._mlkernel",
                sources=["src/secbeam/_mlkernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            ),
            Extension(
                "secbeam._socpcore",
                sources=["src/secbeam/_socpcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            ),
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: install without the compiled kernels; the
    # pure-numpy paths are selected automatically at import.
    ext_modules = []

setup(ext_modules=ext_modules)
