import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="density_coverage",
    version="0.1.0",
    author="Density Coverage Developers",
    description="density_coverage is a Python package that simulates decentralized density-driven coverage of a target distribution by swarms of linear agents.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=["density_coverage", "density_coverage.io"],
    package_data={"density_coverage": ["scenarios/*.toml"]},
    license='MIT',
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
    install_requires=[
        "numpy",
        "scipy",
        "networkx",
        "tabulate",
        "matplotlib",
        "numba",
        "ortools",
        "pandas",
        "multiprocess",
        "pot",
        "pydantic>=2",
        "tomli-w",
        "tomli; python_version < '3.11'",
    ],
    entry_points={"console_scripts": ["density-coverage=density_coverage.cli:main"]},
)
