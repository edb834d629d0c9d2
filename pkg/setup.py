"""Build script for the optional compiled kernel extension.

The extension only accelerates pointwise inner loops (powers of |u|, the
nonlinear phase screw, nonlocal force assembly).  If it fails to build on a
host, the package still works through the pure-numpy fallback selected at
import time in ``choquard.backend``.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure is non-fatal
            print(f"warning: compiled kernels skipped ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)


def make_extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "choquard._kernels",
        ["src/choquard/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffast-math", "-march=native"],
        extra_link_args=["-lmvec", "-lm"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
