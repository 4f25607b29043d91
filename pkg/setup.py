"""Build hook for the C matching extension.

Everything declarative lives in pyproject.toml; this file only exists because
setuptools still wants ext_modules configured in Python.
"""

from setuptools import Extension, setup

setup(
    ext_modules=[
        Extension(
            "surfcycle._blossom",
            sources=["src/surfcycle/_blossom.c"],
            extra_compile_args=["-O2", "-std=c99"],
        )
    ]
)
