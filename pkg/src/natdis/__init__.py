"""natdis: discrete-time DTN simulator with a post-disaster mobility model."""

__version__ = "0.1.0"
