"""Build script for the optional compiled dual-ascent kernel.

The package works without the extension (a pure-numpy kernel is selected at
import time), so build failures here degrade to a pure-Python install
instead of aborting.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that tolerates a missing compiler or Cython."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            warnings.warn(f"compiled kernel skipped ({exc}); using pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"compiled kernel skipped ({exc}); using pure-Python backend")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "papcbeam._dualcore",
        ["src/papcbeam/_dualcore.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
