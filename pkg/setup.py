"""Build script; the Cython core is optional and the package falls back to
numpy kernels when it cannot be compiled."""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    pass
else:
    ext_modules = cythonize(
        [Extension("dppmle._core", ["src/dppmle/_core.pyx"],
                   include_dirs=[np.get_include()], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
