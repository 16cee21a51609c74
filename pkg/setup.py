import numpy as np
from setuptools import Extension, setup

# The compiled kernel core is optional: if Cython or a C compiler is missing
# the package falls back to the numpy kernels at import time.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "mex3d.kernels._native",
                ["src/mex3d/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
