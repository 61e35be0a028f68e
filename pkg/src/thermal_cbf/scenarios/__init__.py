"""Bundled scenario files."""

from importlib import resources


def scenario_path(name: str):
    """Filesystem path of a bundled scenario JSON (e.g. "paperlike.json")."""
    return resources.files(__name__).joinpath(name)
