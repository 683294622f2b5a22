from setuptools import find_packages, setup

with open("README.md", "r") as fh:
    long_description = fh.read()

setup(
    name='critwalk',
    version='0.1.0',
    python_requires='>=3.8',
    description='Exploration-process simulations of critical random graphs',
    long_description=long_description,
    long_description_content_type='text/markdown',
    platforms='Linux',
    packages=find_packages(exclude=('tests',)),
    install_requires=(
        "numpy",
        "scipy",
        "symengine",
        "tqdm",
        "plotly",
        "networkx",
    ),
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['critwalk=critwalk.cw_cli:main'],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Natural Language :: English',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
    ],
)
