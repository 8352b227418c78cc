import re
from os import path
from setuptools import setup, find_packages


def load_version():
    """Read ``__version_info__`` from snnuq/__init__.py without importing."""
    pkg_path = path.abspath(path.dirname(__file__))
    with open(path.join(pkg_path, 'snnuq', '__init__.py')) as f:
        match = re.search(r'^__version_info__ = \((.*)\)', f.read(), re.M)
    return '.'.join(re.findall(r'["\']([^"\']*)["\']', match.group(1)))


__version__ = load_version()


def load_readme():
    """
    Load the readme from the root of the package directory.

    :returns: A string containing the contents of README.md.
    """
    pkg_path = path.abspath(path.dirname(__file__))
    with open(path.join(pkg_path, 'README.md')) as f:
        long_description = f.read()

    return long_description


setup(
    name='snnuq',
    description='Deep ensembles of self-normalizing networks for tabular '
    'regression with uncertainty under distributional shift.',
    version=__version__,
    author='The snnuq developers',
    license='MIT License',
    packages=find_packages(exclude=["tests", "tests.*"]),
    entry_points={
        'console_scripts': [
                'snnuq = snnuq.snnuq:console',
        ]
    },
    install_requires=[
        'PyYAML>=5.1',
        'six',
        "filelock",
        "tabulate",
        "dill",
        "jsonschema>=3.2.0",
        "coloredlogs",
        "rich",
        "numpy>=1.20",
        "pandas>=1.2",
        "matplotlib>=3.3",
        "scikit-learn>=1.1",
    ],
    extras_require={},
    long_description=load_readme(),
    long_description_content_type='text/markdown',
    python_requires='>=3.8',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Operating System :: Unix',
        'Operating System :: MacOS :: MacOS X',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ],
    package_data={
        'snnuq': [
            'configuration/schemas/*.json'
        ],
    },
    include_package_data=True,
)
