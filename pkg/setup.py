"""Python package setup configuration."""

from setuptools import setup, find_packages

setup(
    name="intermodal-mtl",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.11",
    install_requires=[
        "numpy>=1.26.0",
        "pydantic>=2.5.0",
        "pyyaml>=6.0",
        "matplotlib>=3.8.0",
    ],
    entry_points={
        "console_scripts": ["intermodal-mtl=intermodal_mtl.cli:main"],
    },
)
