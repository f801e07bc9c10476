from setuptools import setup, find_packages

setup(
    name="hypalg",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "click>=8.0",
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    entry_points={
        "console_scripts": [
            "hypalg = hypalg.cli:cli",  # CLI entry point
        ],
    },
    description="Harmonic analysis on SL(2,R): Losert basis, Plancherel transforms and current algebras",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
