"""Game-theory engine for recursive games and Guts poker."""

__version__ = "0.1.0"
