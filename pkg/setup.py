"""Build hook for the optional compiled SAT kernel.

If Cython or a C++ compiler is missing, the package still installs and the
pure-Python kernel is used at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "tfsynth._csat",
        ["src/tfsynth/_csat.pyx"],
        language="c++",
        extra_compile_args=["-O2"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)

setup(ext_modules=ext_modules)
