"""Sub-band digital predistortion simulator for dual-carrier transmitters."""

__version__ = "1.0.0"
