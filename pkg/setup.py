#!/usr/bin/env python
"""blindsr installation script."""
# This script only installs dependencies available on PyPI

from pathlib import Path

from setuptools import setup

from blindsr._version import __version__

PACKAGES = [
    'blindsr',
    'blindsr.degradation',
    'blindsr.imaging',
    'blindsr.nn',
]

REQUIREMENTS = {
    # Installation script (this file) dependencies
    'setup': [
        'pytest-runner',
    ],
    # Installation dependencies
    # Use with pip install . to install from source
    'install': [
        'matplotlib',
        'numpy>=1.20',
        'pillow',
        'psutil',
        'pyyaml',
        'scipy',
        'yamale',
    ],
    # Test dependencies
    # Execute 'python setup.py test' to run tests
    'test': [
        'hypothesis',
        'mock',
        'pytest>=3.9',
        'pytest-cov',
        'pytest-env',
    ],
    # Development dependencies
    # Use pip install -e .[develop] to install in development mode
    'develop': [
        'isort',
        'prospector[with_pyroma]!=1.1.6.3,!=1.1.6.4',
        'sphinx',
        'sphinx_rtd_theme',
        'yamllint',
        'yapf',
    ],
}


setup(
    name='blindsr',
    version=__version__,
    description='Blind super-resolution with transitional learning',
    long_description=Path('README.md').read_text(),
    license='Apache License, Version 2.0',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Natural Language :: English',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Image Processing',
    ],
    packages=PACKAGES,
    package_data={
        'blindsr': [
            'config-default.yml',
            'config-logging.yml',
            'config_schema.yml',
        ],
    },
    setup_requires=REQUIREMENTS['setup'],
    install_requires=REQUIREMENTS['install'],
    tests_require=REQUIREMENTS['test'],
    extras_require={
        'develop': REQUIREMENTS['develop'] + REQUIREMENTS['test'],
    },
    entry_points={
        'console_scripts': [
            'blindsr = blindsr._main:run',
        ],
    },
    zip_safe=False,
)
