import pytest
from hypothesis import settings

from energybounds.corpus import CORPUS
from energybounds.simkernel import load_model

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def model():
    return load_model()


@pytest.fixture(scope="session")
def programs():
    return {name: b.program() for name, b in CORPUS.items()}


@pytest.fixture(scope="session")
def fact(programs):
    return programs["fact"]
