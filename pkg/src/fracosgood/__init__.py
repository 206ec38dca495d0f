"""Time-fractional non-Gaussian semilinear equations with Osgood-type sources."""

__version__ = "0.1.0"
