"""Shared pytest configuration.

Keeps the tests importable as plain modules (``import helpers``) and pins
hypothesis to a CI-friendly profile.
"""

import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "ci",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")
