"""Build the optional compiled kernels.

The package works without them: ``gaussctl._backend`` falls back to the
pure-Python kernels when the extension cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("GAUSSCTL_NO_EXTENSION", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            ["src/gaussctl/_ckernels.pyx"],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
