#!/usr/bin/python

from setuptools import setup

setup(
    name='csiaug',
    version='0.1dev',
    description='WiFi CSI spectrogram augmentation and ablation toolkit',
    packages=['csiaug',],
    license='Creative Commons Attribution-ShareAlike license',
    install_requires=[
        'numpy>=1.22',
        'torch>=2.2',
        'Pillow>=9.0',
        'pycurl>=7.45',
        'scipy>=1.9',
    ],
    entry_points={
        'console_scripts': ['csiaug = csiaug.cli:main'],
    },
    python_requires='>=3.9',
    test_suite='tests',
)
