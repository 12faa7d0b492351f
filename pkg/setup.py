import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r") as f:
    requirements = f.readlines()

setuptools.setup(
    name="copa-sim",
    version="0.1.0",
    description="Trace-driven simulator of NVM-backed I/O buffers and of "
                "the retention reliability of their persistent journal",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    install_requires=requirements,
    extras_require={
        "test": ["pytest>=6.0"]
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX :: Linux",
    ],
    python_requires='>=3.8',
    entry_points={
        'console_scripts': ['copa-sim = copasim.cli:main']
    },
    package_data={
        "copasim": ["rules/*/*.yaml"]
    },
    include_package_data=True
)
