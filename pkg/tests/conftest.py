import numpy as np
import pytest

from dstlab.ontology import builtin_ontology
from dstlab.orchestrator import DialogueEnv
from dstlab.reward import RewardConfig
from dstlab.usersim import ErrorModel


@pytest.fixture(scope="session")
def toy():
    return builtin_ontology("toy")


@pytest.fixture(scope="session")
def dstc2():
    return builtin_ontology("dstc2-like")


@pytest.fixture(scope="session")
def dstc3():
    return builtin_ontology("dstc3-like")


@pytest.fixture
def toy_env(toy):
    return DialogueEnv(toy, ErrorModel(error_rate=0.0, nbest=1), RewardConfig())


@pytest.fixture
def noisy_toy_env(toy):
    return DialogueEnv(toy, ErrorModel(error_rate=0.15), RewardConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
