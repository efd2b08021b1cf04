"""thetalab: numerical experiments with Poincare series, covering graphs and torus Teichmueller space."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
