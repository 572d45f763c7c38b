"""Point-in-time economic scenario generation for S&P500 returns conditioned on the VIX.

Four generators share one evaluation and backtesting harness:

- ``fhs``: VIX-filtered historical simulation
- ``garch``: GARCH(1,1) with Student-t(4) innovations, fitted jointly on returns and VIX
- ``rbm``: Bernoulli RBM with clamped VIX units
- ``cvae``: conditional variational autoencoder
"""
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
