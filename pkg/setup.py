import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PDEIDENT_SKIP_NATIVE"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                name="pdeident.kernels._native",
                sources=["src/pdeident/kernels/_native.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
