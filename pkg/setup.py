# -*- coding: utf-8 -*-
"""
ctda setup script.

"""
from setuptools import setup, find_packages
import os

HERE = os.path.abspath(os.path.dirname(__file__))
README = open(os.path.join(HERE, 'README.rst')).read()
NEWS = open(os.path.join(HERE, 'CHANGELOG.rst')).read()

VERSION = '0.1.0'

setup(name='ctda',
      version=VERSION,
      description="Communication-theoretic data analytics",
      long_description=README + '\n\n' + NEWS,
      classifiers=[
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
          'Programming Language :: Python :: 3.11',
          'Topic :: Scientific/Engineering :: Information Analysis',
      ],
      keywords='equalization fusion information coupling time series',
      license='LGPLv3',
      packages=find_packages(exclude=["tests", "docs"]),
      include_package_data=True,
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=[
        'frozendict>=2.3',
        'schema>=0.7',
        'numpy>=1.21',
        'scipy>=1.7',
        'pandas>=1.5',
      ],
      entry_points={
        'console_scripts': ['ctda=ctda.cli:main'],
      })
