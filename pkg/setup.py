from setuptools import setup, find_packages

setup(
    name="plannet",
    use_scm_version={"write_to": "src/plannet/_version.py", "fallback_version": "0.0.0"},
    description="Bayesian-network plan recognition with a story/life equality-prior knob",
    long_description=open("README.md", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=[
        "parse",
        "pydantic>=2.0.0",
        "numpy",
        "networkx",
        "graphviz",
    ],
    extras_require={
        "dev": ["pytest", "hypothesis", "black", "flake8"],
    },
    entry_points={
        "console_scripts": ["plannet=plannet.cli:main"],
    },
)
