#
# sqcontrol setuptools script
#
from setuptools import setup, find_packages


def get_version():
    """
    Get version number from the sqcontrol module.

    Importing ``sqcontrol`` itself would fail before numpy, scipy and pandas
    are installed, so the version is read from the dependency free
    version_info module instead.
    """
    import os
    import sys

    sys.path.append(os.path.abspath('sqcontrol'))
    from version_info import VERSION as version
    sys.path.pop()

    return version


def get_readme():
    """
    Load README.md text for use as description.
    """
    with open('README.md', encoding='utf-8') as f:
        return f.read()


# Go!
setup(
    # Module name (lowercase)
    name='sqcontrol',

    # Version
    version=get_version(),

    description='Optimal control of the bilinear Schroedinger equation: '
                'projected gradient solver and optimality checks.',

    long_description=get_readme(),

    long_description_content_type="text/markdown",

    license='MIT license',

    # Packages to include
    packages=find_packages(include=('sqcontrol', 'sqcontrol.*')),

    # Bundled configs and test fixtures
    package_data={
        'sqcontrol': ['configs/*.json'],
        'sqcontrol.tests': ['fixtures/*.json'],
    },

    entry_points={
        'console_scripts': ['sqcontrol=sqcontrol.cli:run'],
    },

    python_requires='>=3.8',

    # List of dependencies
    install_requires=[
        'numpy>=1.21',
        'matplotlib>=3.4',
        'scipy>=1.7',
        'pandas>=1.3',
    ],
    extras_require={
        'docs': [
            # Sphinx for doc generation. Version 1.7.3 has a bug:
            'sphinx>=1.5, !=1.7.3',
            # Nice theme for docs
            'sphinx_rtd_theme',
        ],
        'dev': [
            # Flake8 for code style checking
            'flake8>=3',
        ],
    },

)
