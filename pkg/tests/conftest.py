import pytest

from gammanoise.grid import Grid
from gammanoise.rng import stream


@pytest.fixture
def grid1d():
    return Grid(1, 256)


@pytest.fixture
def rng():
    return stream(20250809, 0)


def random_real_field(grid, gen):
    from gammanoise.grid import forward_transform
    return forward_transform(grid, gen.standard_normal(grid.shape))


def random_complex_field(grid, gen):
    from gammanoise.grid import forward_transform
    vals = gen.standard_normal(grid.shape) + 1j * gen.standard_normal(grid.shape)
    return forward_transform(grid, vals)
