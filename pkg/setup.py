"""Build hook for the optional compiled evaluation kernel.

The package is fully functional without the extension (a pure-Python
backend is selected at import time); building it just makes integration
and sampling loops much faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("singmech._kernel._ctape", ["src/singmech/_kernel/_ctape.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
