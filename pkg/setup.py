from setuptools import setup, find_packages

setup(
    name="qsdc_sim",
    version="0.1.0",
    author="Nils Dittrich",
    author_email="nils.dittrich@ntnu.no",
    description="Two-qubit simulator and Monte Carlo harness for super dense coding QSDC",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(),
    package_data={"qsdc_sim.tests": ["data/*.txt"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=[
        # not all versions and combination of versions are tested
        "numpy>=1.18.0,<3.0.0",
        "scipy>=1.4.0,<2.0.0",
        "tqdm>=4.41.0,<5.0.0",
        "sympy>=1.5.0,<2.0.0",
    ],
    entry_points={"console_scripts": ["qsdc-sim=qsdc_sim.cli:main"]},
)

# install with "python -m pip install -e ."
