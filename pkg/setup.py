import setuptools

requires = [
    "numpy>=1.19",
    "scipy>=1.5",
    "pandas",
    "joblib",
    "tqdm",
    "networkx>=2.5",
]
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="qgraphpy",
    version="0.1.0",
    description="Spectra, surgery and numeric bound checks for quantum graphs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*", "docs_sphinx"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=requires,
    extras_require={"test": ["pytest", "hypothesis"], "docs": ["sphinx"]},
    entry_points={"console_scripts": ["qgraphpy=qgraphpy.cli:main"]},
)
