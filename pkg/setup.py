"""Build script: compiles the optional native kernel extension.

The extension accelerates page synthesis, zero/CRC scanning, and the
word-RLE codec. If Cython or a C toolchain is unavailable the install
still succeeds and elasmem falls back to the pure-Python kernels at
import time.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: native kernel build skipped ({exc}); "
                  "using pure-Python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "using pure-Python kernels", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("warning: Cython not available, skipping native kernels",
              file=sys.stderr)
        return []
    ext = Extension(
        "elasmem.kernels._native",
        ["src/elasmem/kernels/_native.pyx"],
        libraries=["z"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
