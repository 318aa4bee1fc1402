"""wwkde - recursive kernel density estimation with data-driven power-law bandwidths"""

__version__ = "0.1.0"
