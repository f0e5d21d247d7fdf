"""Compressed sensing in sensor networks with dropped measurements.

Core pieces: network topologies with Bernoulli erasure links, exact
distributions of the observed-measurement count, measurement bounds for
sparse recovery, subGaussian sensing, greedy/thresholding/l1 solvers, a
restricted-isometry oracle, and a Monte-Carlo experiment harness. A FastAPI
service exposes everything over HTTP; the ``csdrop`` CLI is a thin client.
"""

__version__ = "0.1.0"

from .errors import CapacityError, ConfigError, DegenerateObservationError

__all__ = ["CapacityError", "ConfigError", "DegenerateObservationError", "__version__"]
