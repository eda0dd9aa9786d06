"""Bundled example network and boundary-problem files.

The dolphins social network (62 vertices, 159 edges, 1-based ids) ships with
a follower subset of size 20 and a mixed-sign boundary vector on its leader
boundary; together they form the reference problem used by the sweep and
solver examples.
"""

from importlib import resources
from pathlib import Path

__all__ = ["fixture_path", "dolphins_graph_path", "dolphins_subset_path", "dolphins_boundary_path"]


def fixture_path(name: str) -> Path:
    path = resources.files(__package__).joinpath(name)
    return Path(str(path))


def dolphins_graph_path() -> Path:
    return fixture_path("dolphins.edges")


def dolphins_subset_path() -> Path:
    return fixture_path("dolphins_followers.txt")


def dolphins_boundary_path() -> Path:
    return fixture_path("dolphins_boundary.txt")
