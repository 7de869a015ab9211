import pytest

from trailset.ingest import demo_dataset
from trailset.model import Resolver


@pytest.fixture
def demo():
    return demo_dataset()


@pytest.fixture
def resolver(demo):
    return Resolver(demo)
