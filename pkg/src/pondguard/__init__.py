"""Verified rules-based collision avoidance for a pond-survey vehicle, with its safety evidence."""

from pathlib import Path

__version__ = "0.1.0"

# bundled fixtures: baseline rules, properties and scenarios
DATA_DIR = Path(__file__).parent / "data"
