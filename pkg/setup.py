import re
from pathlib import Path

from setuptools import find_packages, setup

MIN_PYTHON = (3, 10)
HERE = Path(__file__).resolve().parent


def _read_version() -> str:
    text = (HERE / "sumsquares" / "_version.py").read_text()
    match = re.search(r'^__version__ = "([^"]+)"', text, re.MULTILINE)
    if match is None:
        raise RuntimeError("Unable to find __version__ in sumsquares/_version.py")
    return match.group(1)


def _read_requirements(name: str):
    lines = (HERE / "requirements" / name).read_text().splitlines()
    return [line.strip() for line in lines if line.strip() and not line.startswith("#")]


setup(
    name="sumsquares",
    version=_read_version(),
    description="Type I, II and III sums of squares for linear models with factor effects",
    long_description=(HERE / "README.rst").read_text(encoding="utf-8"),
    long_description_content_type="text/x-rst",
    python_requires=">=" + ".".join(str(n) for n in MIN_PYTHON),
    packages=find_packages(exclude=["docs"]),
    package_data={"sumsquares": ["tests/test_data_files/*.csv"]},
    entry_points={"console_scripts": ["sumsquares-cli=sumsquares.cli:entry_point"]},
    install_requires=_read_requirements("requirements.txt"),
    extras_require={"dev": _read_requirements("requirements-dev.txt")},
    license="BSD (3-clause)",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
