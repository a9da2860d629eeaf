"""Second-class particles, basic coupling and competition growth in the ASEP rarefaction fan."""

__version__ = "0.1.0"
