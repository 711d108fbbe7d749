from setuptools import setup

setup(
    name="qdeph",
    version="0.1.0",
    description="Dephasing channels, entropy-gain bounds and verification campaigns",
    python_requires=">=3.9",
    py_modules=[
        "app",
        "campaigns",
        "channels",
        "codec",
        "entropy",
        "errors",
        "mathcore",
        "qdeph",
        "roof",
        "service_limits",
        "states",
    ],
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "Flask>=2.3",
        "flask-cors>=3.0",
        "Flask-Limiter>=3.5",
        "Flask-Caching>=2.1",
        "python-dotenv>=1.0",
        "click>=8.1",
    ],
    entry_points={"console_scripts": ["qdeph=qdeph:cli"]},
)
