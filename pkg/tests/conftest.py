"""Shared fixtures: shipped data files and the C.1 building system."""

from pathlib import Path
import numpy as np
import pytest
from src.config import get_data_dir
from src.presentation import ensure_valid, parse_presentation
from src.tiles import Tile, build_building_system

F2_MATRIX = np.array(
    [[1, 0, 1, 1],
     [0, 1, 1, 1],
     [1, 1, 1, 0],
     [1, 1, 0, 1]],
    dtype=np.int64,
)

THETA_MATRIX = np.array(
    [[0, 0, 0, 1, 0, 1],
     [0, 0, 1, 0, 1, 0],
     [0, 1, 0, 0, 0, 1],
     [1, 0, 0, 0, 1, 0],
     [0, 1, 0, 1, 0, 0],
     [1, 0, 1, 0, 0, 0]],
    dtype=np.int64,
)

# Tiles read off the figures for C.1, as generator indices (ll, lr, mid, ur, ul)
TILE_A = Tile(0, 2, 3, 1, 5)
TILE_B = Tile(1, 5, 4, 2, 5)
TILE_C = Tile(4, 5, 2, 1, 6)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return get_data_dir()


@pytest.fixture(scope="session")
def c1_text(data_dir) -> str:
    return (data_dir / "c1.tri").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def c1(c1_text):
    return ensure_valid(parse_presentation(c1_text))


@pytest.fixture(scope="session")
def c1_system(c1):
    return build_building_system(c1)


@pytest.fixture(scope="session")
def figure_tiles(c1_system):
    """Indices of the tiles a, b, c in the canonical alphabet."""
    tiles = list(c1_system.tiles)
    return tiles.index(TILE_A), tiles.index(TILE_B), tiles.index(TILE_C)
