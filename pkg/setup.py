from setuptools import setup, find_packages

setup(
    name='metricdiff',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),
    license='BSD-3',
    python_requires=">=3.8",
    install_requires=[
          'numpy',
          'scipy',
    ],
    extras_require={
          'tests': ['pytest'],
    },
    entry_points={
          'console_scripts': ['metricdiff = metricdiff.cli:main'],
    },
    long_description=open('README.md').read(),
)
