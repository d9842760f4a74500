import setuptools
import os


# Utility function to read the README file.
# Used for the long_description.
def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setuptools.setup(
    name='realensemble',
    version='0.1.0',
    license="BSD (3-clause)",
    packages=setuptools.find_packages(),
    package_data={'realensemble': ['json/*.json']},
    long_description=read('README.md'),
    classifiers=[
        "License :: OSI Approved :: BSD License",
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    install_requires=['h5py', 'numpy', 'scipy', 'pyyaml', 'jsonschema'],
    entry_points={
        'console_scripts': ['realensemble = realensemble.commands:main'],
    },
)
