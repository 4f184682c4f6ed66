
import pytest

from config import Config
from services.configuration import Configuration
from services.exact_geometry import HalfSpace
from services.split_service import generate_nested_pairs, generate_perfect_split


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch, tmp_path):
    monkeypatch.setattr(Config, 'SHOW_PROGRESS', False)
    monkeypatch.setattr(Config, 'OUTPUT_DIR', str(tmp_path / 'reports'))


@pytest.fixture
def split_line():
    """{x < 0} and {x > 0} in Q^1."""
    return (HalfSpace.make([-1], 0), HalfSpace.make([1], 0))


@pytest.fixture
def two_pairs():
    return Configuration.from_lists(1, 2, [[[-1], [1]], [[-2], [2]]])


@pytest.fixture
def nested4():
    return generate_nested_pairs(4)


@pytest.fixture
def perfect_pairs():
    return generate_perfect_split(4, 2, 2, seed=7)


@pytest.fixture
def perfect_triples():
    return generate_perfect_split(3, 3, 2, seed=7)
