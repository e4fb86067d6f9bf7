"""Bundled example models."""

from importlib import resources
from pathlib import Path

NAMES = ("altitude", "altitude3", "altitude3_fixed")


def path(name: str) -> Path:
    """Filesystem path of a bundled model, e.g. ``path("altitude")``."""
    return Path(str(resources.files(__name__).joinpath(f"{name}.lus")))


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
