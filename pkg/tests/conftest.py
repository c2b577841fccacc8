import json
from pathlib import Path

import numpy as np
import pytest

import regpd
from regpd.imagery import RasterImage
from regpd.scenes import disk_image

DATA = Path(regpd.__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def two_blob_params():
    blobs = json.loads((DATA / "two_blob.json").read_text())["blobs"]
    return [(tuple(b["color"]), b["tolerance"], b["reference_fraction"]) for b in blobs]


@pytest.fixture
def uniform_image():
    return RasterImage(np.full((64, 64, 3), 128.0))


@pytest.fixture
def disk64():
    return disk_image(64)


def bfs_region(labels, start):
    """Pixels reachable from ``start`` through 4-neighbours of the same label."""
    height, width = labels.shape
    value = labels[start]
    seen = {start}
    todo = [start]
    while todo:
        y, x = todo.pop()
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < height and 0 <= nx < width and (ny, nx) not in seen \
                    and labels[ny, nx] == value:
                seen.add((ny, nx))
                todo.append((ny, nx))
    return seen
