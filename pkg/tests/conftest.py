import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from morphtok.corpus import chunk_text, count_frequencies  # noqa: E402
from morphtok.morfessor import TrainParams, train_unsupervised  # noqa: E402
from morphtok.tokenizer import build_bundle  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DANISH = """\
Hej med dig! Hvordan går det med skoletasken og landstræneren?
Landstræneren lånte en skoletaske af sin venlige nabo i går.
Vi spiste smørrebrød med rejer, æg og karse klokken 12.30.
Børnene legede i haven, mens de voksne drak kaffe og snakkede.
Den venlige bager solgte rugbrød, wienerbrød og kanelsnegle.
Fodboldlandsholdet vandt kampen 3-1 efter en spændende anden halvleg.
Kan du bibringe eleverne en forståelse for historien?
Skolebørnene cyklede hjem fra skole i regnvejret.
"""


@pytest.fixture(scope="session")
def danish_text():
    return DANISH * 4


@pytest.fixture(scope="session")
def danish_counts(danish_text):
    return count_frequencies(chunk_text(danish_text))


@pytest.fixture(scope="session")
def danish_model(danish_counts):
    return train_unsupervised(danish_counts, TrainParams(rng_seed=0))


@pytest.fixture(scope="session")
def morph_bundle(danish_counts, danish_model):
    return build_bundle("morph", danish_counts, danish_model, 420)


@pytest.fixture(scope="session")
def mixed_bundle(danish_counts, danish_model):
    return build_bundle("mixed", danish_counts, danish_model, 800, 0.6)


_acceptance_lines = []


@pytest.fixture
def report():
    """Print one PASS/FAIL line for an acceptance criterion and repeat it in the summary."""
    def _report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        _acceptance_lines.append(line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
