import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from citequery.catalog import builtin_catalog
from citequery.ingest import iter_citances, load_corpus

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_CORPUS = DATA_DIR / "golden_corpus.jsonl"
GOLDEN_MATCHES = DATA_DIR / "golden_matches.csv"


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


@pytest.fixture(scope="session")
def catalog_by_id(catalog):
    return {q.query_id: q for q in catalog}


@pytest.fixture(scope="session")
def golden_documents():
    result = load_corpus(GOLDEN_CORPUS)
    assert not result.errors
    return result.documents


@pytest.fixture(scope="session")
def golden_citances(golden_documents):
    return list(iter_citances(golden_documents))
