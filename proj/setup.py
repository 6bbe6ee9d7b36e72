"""CMake-driven extension build for the hpsem package.

The compiled core lives in the top-level CMake project; this shim
configures and builds the `_core` pybind11 target and copies the
resulting module next to the pure-python package.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            ["cmake", "-S", str(source_dir), "-B", str(build_dir),
             "-DCMAKE_BUILD_TYPE=Release"],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core",
             f"-j{max(1, self.parallel or 8)}"],
            check=True,
        )
        built = next((build_dir / "python" / "hpsem").glob("_core.*"))
        dest = Path(self.get_ext_fullpath(ext.name)).resolve()
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest.parent / built.name)


setup(
    packages=["hpsem"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("hpsem._core")],
    cmdclass={"build_ext": CMakeBuild},
)
