from setuptools import setup, find_packages
PACKAGES = find_packages(exclude=['tests'])

install_requires = [
   "pandas>=1.5",
   "numpy",
   "scipy",
   "networkx>=2.2"]


if __name__ == '__main__':
    setup(
        name='qkdsim',
        version='0.1dev',
        packages=PACKAGES,
        package_data={'': ['*.txt', '*.csv']},
        license='MIT license',
        install_requires=install_requires,
        tests_require=['pytest'],
        test_suite='py.test',
        entry_points={
            'console_scripts': [
                'qkd=qkdsim.wrappers.qkd_from_scenario:main',
                'handshake=qkdsim.wrappers.handshake_from_scenario:main',
            ]},
    )
