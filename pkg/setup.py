from setuptools import setup

setup(
    name='netmark',
    version='0.1.0',
    packages=['netmark'],
    license='GPL3',
    description='Mark summary characteristics for point patterns with '
                'function-valued marks on linear networks',
    python_requires='>=3.8',
    install_requires=[
        'networkx>=2.7',
        'numpy>=1.21',
        'scipy>=1.7',
        'shapely>=2.0',
        'sqlalchemy>=1.4',
    ],
    tests_require=[
        'pytest',
        'pytest-it',
        'sqlalchemy-utils'
    ],
    entry_points={
        'console_scripts': ['netmark=netmark.cli:main']
    }
)
