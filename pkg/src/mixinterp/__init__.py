"""Craig interpolation for linear arithmetic with uninterpreted functions, mixed literals included."""

__version__ = "0.1.0"
