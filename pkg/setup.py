from setuptools import setup, find_packages

setup(
    name="davnsim",
    version="1.0.0",
    description="Dataset simulator for drone-assisted vehicular networks: priority queueing, UAV link budgets, propulsion energy and mobility.",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"davnsim": ["data/version.txt"]},
    install_requires=[
        "pydantic>=2.5",
        "pydantic-settings>=2.2",
        "numpy>=1.22",
        "pandas>=1.5",
        "simpy>=4.0",
        "tomli>=2.0; python_version < '3.11'",
    ],
    entry_points={"console_scripts": ["davnsim = davnsim.cli:main"]},
    keywords=["uav", "vehicular network", "queueing", "simulation", "dataset"],
    python_requires=">=3.9",
)
