"""Build the optional compiled walk kernel.

The extension is a convenience, not a requirement: if Cython or a C
compiler is missing the build falls back to a pure-Python kernel with
bit-identical output (see src/specdom/walkcore.py).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled walk kernel skipped ({exc})")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"warning: compiled walk kernel skipped ({exc})")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available, building without compiled kernel")
        return []
    ext = Extension(
        "specdom._walk",
        sources=["src/specdom/_walk.pyx"],
        # -ffp-contract=off keeps the float sequence identical to the
        # pure-Python kernel (no fused multiply-add).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
