from __future__ import annotations

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from thaifront import corpus_io
from thaifront.segmentation import build_trie

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def lexicon():
    return corpus_io.load_lexicon(FIXTURES / "lexicon.txt")


@pytest.fixture(scope="session")
def trie(lexicon):
    return build_trie(lexicon)


@pytest.fixture(scope="session")
def annotations():
    return corpus_io.load_phoneme_tone_annotations(FIXTURES / "annotations.tsv")


@pytest.fixture(scope="session")
def exceptions_entries():
    return corpus_io.load_phoneme_tone_annotations(FIXTURES / "exceptions.tsv")


@pytest.fixture(scope="session")
def g2p_words():
    return corpus_io.load_phoneme_tone_annotations(FIXTURES / "g2p_words.tsv")


def golden_config(**overrides):
    from thaifront.pipeline import PipelineConfig

    base = dict(lexicon=str(FIXTURES / "lexicon.txt"), vocab=str(GOLDEN / "vocab.tsv"),
                pause_model=str(GOLDEN / "pause.model"), exceptions=str(FIXTURES / "exceptions.tsv"))
    base.update(overrides)
    return PipelineConfig.from_mapping(base)


@pytest.fixture
def golden_cfg():
    return golden_config()


# criterion number -> (passed, description); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {desc}")
