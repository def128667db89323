"""Next-day golfer performance prediction from interview facial micro-movement."""

__version__ = "0.1.0"
