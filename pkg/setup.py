#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os

from setuptools import setup


def get_long_description():
    with open('README.md', encoding='utf8') as f:
        return f.read()


def get_packages(package):
    return [
        dirpath
        for dirpath, dirnames, filenames in os.walk(package)
        if os.path.exists(os.path.join(dirpath, '__init__.py'))
    ]


setup(
    name='phaseseg',
    version='0.1.0',
    python_requires='>=3.9',
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.10',
    ],
    license='MIT',
    description='Numerical experiments on phase segregation in two-component Bose-Einstein condensates',
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    packages=get_packages('phaseseg'),
    entry_points={
        'console_scripts': ['phaseseg=phaseseg.cli:main'],
    },
    include_package_data=True,
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    zip_safe=False,
)
