import json

import pytest

from sigmatree.corpus import all_entries, load_example


@pytest.fixture(scope="session")
def corpus():
    return {e.name: e for e in all_entries()}


@pytest.fixture(scope="session")
def two_rose():
    return load_example("two_rose").ptp


@pytest.fixture(scope="session")
def ascending():
    return load_example("ascending_synthetic").ptp


@pytest.fixture(scope="session")
def bs24():
    return load_example("bs24_to_bs12").ptp


@pytest.fixture(scope="session")
def free_product():
    return load_example("free_product").ptp


@pytest.fixture(scope="session")
def line_identity():
    return load_example("line_identity").ptp


def make_doc(**overrides):
    """A small valid document, mutate via overrides for negative tests."""
    doc = {
        "name": "probe",
        "upstairs": {
            "vertex_types": ["v"],
            "edge_classes": [
                {"id": "a+", "from": "v", "to": "v", "reverse": "a-", "mult": 1},
                {"id": "a-", "from": "v", "to": "v", "reverse": "a+", "mult": 2},
            ],
        },
        "downstairs": {
            "vertex_types": ["w"],
            "edge_classes": [
                {"id": "b+", "from": "w", "to": "w", "reverse": "b-", "mult": 1},
                {"id": "b-", "from": "w", "to": "w", "reverse": "b+", "mult": 1},
            ],
        },
        "q": {
            "vertex_map": {"v": "w"},
            "cells": [
                {"at": "v", "target": "b+", "coverage": 1,
                 "sources": [{"class": "a+", "fiber": 1}]},
                {"at": "v", "target": "b-", "coverage": 1,
                 "sources": [{"class": "a-", "fiber": 2}]},
            ],
        },
    }
    doc.update(overrides)
    return json.dumps(doc)


@pytest.fixture
def deficient_doc():
    """Valid but not locally surjective; its one collapsing class is only
    partially marked (coverage 1 of multiplicity 2)."""
    return json.dumps({
        "name": "deficient",
        "upstairs": {
            "vertex_types": ["v"],
            "edge_classes": [
                {"id": "a+", "from": "v", "to": "v", "reverse": "a-", "mult": 1},
                {"id": "a-", "from": "v", "to": "v", "reverse": "a+", "mult": 2},
            ],
        },
        "downstairs": {
            "vertex_types": ["w"],
            "edge_classes": [
                {"id": "b+", "from": "w", "to": "w", "reverse": "b-", "mult": 2},
                {"id": "b-", "from": "w", "to": "w", "reverse": "b+", "mult": 2},
            ],
        },
        "q": {
            "vertex_map": {"v": "w"},
            "cells": [
                {"at": "v", "target": "b+", "coverage": 1,
                 "sources": [{"class": "a+", "fiber": 1}]},
                {"at": "v", "target": "b-", "coverage": 1,
                 "sources": [{"class": "a-", "fiber": 2}]},
            ],
        },
    })
