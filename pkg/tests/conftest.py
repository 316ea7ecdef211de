import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emailauthor import ccm  # noqa: E402
from emailauthor.content import build_codebook  # noqa: E402
from emailauthor.stylometry import StyleConfig, build_schema  # noqa: E402
from emailauthor.synthetic import generate_synthetic_corpus  # noqa: E402


@pytest.fixture(scope="session")
def small_corpus():
    return generate_synthetic_corpus(n_authors=5, emails_per_author=40, seed=2)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    config = StyleConfig()
    codebook = build_codebook(small_corpus)
    schema = build_schema(config, codebook)
    return ccm.train_ccm(small_corpus, schema, codebook, ccm.CcmParams(seed=1), config)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=lambda k: int(k[1:])):
            terminalreporter.write_line(lines[key])
