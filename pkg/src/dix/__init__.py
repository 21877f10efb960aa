"""Inner and outer bounds on the capacity region of distributed index coding."""

__version__ = "0.1.0"
