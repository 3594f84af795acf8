from setuptools import setup, find_packages

version = '0.3.0'
description = 'Closed-loop robot dynamic identification laboratory.'
long_description = '''
IdentSuite
==========

IdentSuite identifies the base dynamic parameters of a synthetic 2-DOF
SCARA robot driven by PD position loops. It compares the inverse dynamic
model least-squares method (IDIM), the torque-only DIDIM method and a
position output-error baseline on reproducible simulated experiments.
'''.lstrip()

# https://pypi.org/classifiers/

classifiers = [
    'Development Status :: 3 - Alpha',
    'Environment :: Console',
    'Intended Audience :: Science/Research',
    'License :: OSI Approved :: ISC License',
    'Programming Language :: Python :: 3',
    'Programming Language :: Python :: 3.9',
    'Programming Language :: Python :: 3.10',
    'Programming Language :: Python :: 3.11',
    'Programming Language :: Python :: 3.12',
    "Operating System :: OS Independent",
    'Topic :: Scientific/Engineering',
]

setup(
    name='identsuite',
    python_requires='>=3.9,<4.0',
    version=version,
    description=description,
    long_description=long_description,
    author='IdentSuite developers',
    license='ISC License',
    packages=find_packages(exclude=['tests']),
    package_data={
        'identsuite': ['constants/*.json', 'scenarios/*.yml'],
    },
    install_requires=[
        'numpy>=1.26.0',
        'scipy>=1.11.0',
        'marshmallow>=3.19.0',
        'pydantic>=2.9.2',
        'pyyaml>=6.0.1',
    ],
    entry_points={
        'console_scripts': ['identsuite=identsuite.cli:main'],
    },
    classifiers=classifiers,
)
