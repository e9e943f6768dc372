import pytest

from promptlens.grammar import GenerationConfig, default_lexicon, generate_benchmark
from promptlens.mocks import make_mock_clients


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def small_benchmark(lexicon):
    config = GenerationConfig(
        pp=4, vp=4, conjunction=6, anaphora=2, ellipsis=2,
        fairness=6, complex=4, combination=3, misc=2,
    )
    return generate_benchmark(config, lexicon, seed=7)


@pytest.fixture(scope="session")
def full_benchmark(lexicon):
    return generate_benchmark(GenerationConfig.benchmark_default(), lexicon, seed=0)


@pytest.fixture(scope="session")
def mock_clients(lexicon):
    lm, t2i, vqa, para = make_mock_clients(lexicon)
    yield {"completion": lm, "t2i": t2i, "vqa": vqa, "paraphrase": para}
    for client in (lm, t2i, vqa, para):
        client.close()
