import functools
import random
import shutil

import pytest

from datamin import corpus
from datamin.corpus.randprog import GenConfig, random_corpus
from datamin.symexec import symbolic_execute

DEFAULT_SEED = 20240611

SMALL = GenConfig(max_inputs=2, max_space=256, max_domain=64)


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=DEFAULT_SEED, help="seed for randomised tests")


@pytest.fixture(scope="session")
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return random.Random(seed)


@functools.lru_cache(maxsize=None)
def program(name):
    return corpus.load(name)


@functools.lru_cache(maxsize=None)
def gamma(name):
    return symbolic_execute(program(name))


@pytest.fixture(scope="session")
def random_programs(seed):
    return random_corpus(seed, 12)


@pytest.fixture(scope="session")
def small_programs(seed):
    return random_corpus(seed + 1, 30, SMALL)


def z3_path():
    return shutil.which("z3")


needs_z3 = pytest.mark.skipif(z3_path() is None, reason="no z3 binary on PATH")


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
