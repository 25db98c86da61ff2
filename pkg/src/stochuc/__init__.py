"""Two-stage stochastic unit commitment and low-carbon dispatch toolkit."""

__version__ = "0.1.0"
