from datetime import datetime, timezone
from importlib import resources

import pytest

from clauserank import bws, corpus

FIXED_TS = datetime(2026, 2, 1, 9, 0, tzinfo=timezone.utc)


def consistent_annotations(tuples, annotators=("expert1", "expert2")):
    """Synthetic perfectly consistent annotators: lower sentence index is more
    important. Timestamps fixed so logs are byte-reproducible."""
    anns = []
    for t in tuples:
        best = min(t.members)
        worst = max(t.members)
        for a in annotators:
            anns.append(bws.BWSAnnotation(t.tuple_id, a, best, worst, FIXED_TS))
    return anns


@pytest.fixture(scope="session")
def config():
    return corpus.default_config()


@pytest.fixture(scope="session")
def sample_lease_text():
    return resources.files("clauserank.data").joinpath("sample_lease.txt").read_text("utf-8")


@pytest.fixture(scope="session")
def sample_contract(sample_lease_text, config):
    contract = corpus.load_contract(sample_lease_text, config, contract_id="sample")
    return corpus.filter_sentences(contract, config.definitional_patterns)


@pytest.fixture
def tenant(config):
    return next(p for p in config.parties if p.canonical == "Tenant")


@pytest.fixture
def landlord(config):
    return next(p for p in config.parties if p.canonical == "Landlord")
