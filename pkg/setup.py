import setuptools

with open("README.md", "r", encoding="utf8") as f:
    long_description = f.read()

with open("requirements.txt", encoding="utf8") as f:
    requirements = f.read().splitlines()

setuptools.setup(
    name="dsii",
    version="0.1.0",
    install_requires=requirements,
    license="MIT License",
    description="Inverse scattering transform solver for the focusing Davey-Stewartson II system",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.10",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": ["dsii=dsii.command_line.EntryPoint:main"]
    }
)
