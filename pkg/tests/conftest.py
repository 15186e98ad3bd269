import pytest

import asymid
from asymid.modelio import load


def corpus(name):
    return load(asymid.corpus_path(name))


@pytest.fixture(scope="session")
def dating():
    return corpus("dating.aid")
