"""Built-in tree-pair documents with expected-result annotations.

Each entry is a classical construction realized at the quotient level:

* ``two_rose`` -- the Bass-Serre tree of ``<a,s,t | a^s=a^2, a^t=a^3>``
  (a 7-valent regular tree) collapsing onto the Cayley tree of the free
  quotient F(s,t) (4-valent regular).
* ``free_product`` -- the Bass-Serre tree of ``D_inf * D_inf`` (regular
  tree of countably infinite valence) collapsing onto the Bass-Serre
  tree of ``K_4 * K_4`` (4-valent) under factor-wise abelianization.
* ``bs24_to_bs12`` -- the Bass-Serre tree of ``BS(2,4)`` (6-valent)
  mapping onto that of ``BS(1,2)`` (3-valent) under the projection that
  adds the relation ``t a t^{-1} = a^2``.
* ``ascending_synthetic`` -- a synthetic control exercising the
  unique-candidate path (one clean periodic direction).  No group
  realization is claimed for this entry; it exists to drive the
  classifier and oracles through the singleton branch.
* ``line_identity`` -- the identity on a 2-regular line; locally
  injective, so the classification hypotheses fail by design.

The group ``Z[1/6] x| F(x,y)`` (with x, y acting by halving and
thirding) acts on the same 4-valent tree as ``two_rose`` downstairs and
is known to have a sigma-1 set that is neither empty, a singleton, nor
the whole boundary; no locally-surjective non-locally-injective tree
pair exists over it, so no corpus entry can encode it.  It is mentioned
here only to mark the boundary of the method.

Expectations are tagged with their provenance: ``"construction"`` for
facts forced by the defining data (degrees, star sizes), ``"known"``
for published facts about the construction, and ``"derived"`` for
values this tool computes and its brute-force oracles confirm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SigmatreeError
from .model import PTP, parse_and_validate


@dataclass(frozen=True)
class Expectation:
    field: str
    value: object
    provenance: str


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    document: str
    expected: tuple[Expectation, ...]

    @property
    def ptp(self) -> PTP:
        return parse_and_validate(self.document)


def _doc(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


_TWO_ROSE = _doc({
    "name": "two_rose",
    "upstairs": {
        "vertex_types": ["v"],
        "edge_classes": [
            {"id": "s+", "from": "v", "to": "v", "reverse": "s-", "mult": 1},
            {"id": "s-", "from": "v", "to": "v", "reverse": "s+", "mult": 2},
            {"id": "t+", "from": "v", "to": "v", "reverse": "t-", "mult": 1},
            {"id": "t-", "from": "v", "to": "v", "reverse": "t+", "mult": 3},
        ],
    },
    "downstairs": {
        "vertex_types": ["w"],
        "edge_classes": [
            {"id": "x+", "from": "w", "to": "w", "reverse": "x-", "mult": 1},
            {"id": "x-", "from": "w", "to": "w", "reverse": "x+", "mult": 1},
            {"id": "y+", "from": "w", "to": "w", "reverse": "y-", "mult": 1},
            {"id": "y-", "from": "w", "to": "w", "reverse": "y+", "mult": 1},
        ],
    },
    "q": {
        "vertex_map": {"v": "w"},
        "cells": [
            {"at": "v", "target": "x+", "coverage": 1, "sources": [{"class": "s+", "fiber": 1}]},
            {"at": "v", "target": "x-", "coverage": 1, "sources": [{"class": "s-", "fiber": 2}]},
            {"at": "v", "target": "y+", "coverage": 1, "sources": [{"class": "t+", "fiber": 1}]},
            {"at": "v", "target": "y-", "coverage": 1, "sources": [{"class": "t-", "fiber": 3}]},
        ],
    },
})

_FREE_PRODUCT = _doc({
    "name": "free_product",
    "upstairs": {
        "vertex_types": ["A", "B"],
        "edge_classes": [
            {"id": "ab", "from": "A", "to": "B", "reverse": "ba", "mult": "omega"},
            {"id": "ba", "from": "B", "to": "A", "reverse": "ab", "mult": "omega"},
        ],
    },
    "downstairs": {
        "vertex_types": ["P", "Q"],
        "edge_classes": [
            {"id": "pq", "from": "P", "to": "Q", "reverse": "qp", "mult": 4},
            {"id": "qp", "from": "Q", "to": "P", "reverse": "pq", "mult": 4},
        ],
    },
    "q": {
        "vertex_map": {"A": "P", "B": "Q"},
        "cells": [
            {"at": "A", "target": "pq", "coverage": 4, "sources": [{"class": "ab", "fiber": "omega"}]},
            {"at": "B", "target": "qp", "coverage": 4, "sources": [{"class": "ba", "fiber": "omega"}]},
        ],
    },
})

_BS24_TO_BS12 = _doc({
    "name": "bs24_to_bs12",
    "upstairs": {
        "vertex_types": ["v"],
        "edge_classes": [
            {"id": "s+", "from": "v", "to": "v", "reverse": "s-", "mult": 2},
            {"id": "s-", "from": "v", "to": "v", "reverse": "s+", "mult": 4},
        ],
    },
    "downstairs": {
        "vertex_types": ["w"],
        "edge_classes": [
            {"id": "u+", "from": "w", "to": "w", "reverse": "u-", "mult": 1},
            {"id": "u-", "from": "w", "to": "w", "reverse": "u+", "mult": 2},
        ],
    },
    "q": {
        "vertex_map": {"v": "w"},
        "cells": [
            {"at": "v", "target": "u+", "coverage": 1, "sources": [{"class": "s+", "fiber": 2}]},
            {"at": "v", "target": "u-", "coverage": 2, "sources": [{"class": "s-", "fiber": 2}]},
        ],
    },
})

_ASCENDING_SYNTHETIC = _doc({
    "name": "ascending_synthetic",
    "upstairs": {
        "vertex_types": ["v"],
        "edge_classes": [
            {"id": "s+", "from": "v", "to": "v", "reverse": "s-", "mult": 1},
            {"id": "s-", "from": "v", "to": "v", "reverse": "s+", "mult": 4},
        ],
    },
    "downstairs": {
        "vertex_types": ["w"],
        "edge_classes": [
            {"id": "u+", "from": "w", "to": "w", "reverse": "u-", "mult": 1},
            {"id": "u-", "from": "w", "to": "w", "reverse": "u+", "mult": 2},
        ],
    },
    "q": {
        "vertex_map": {"v": "w"},
        "cells": [
            {"at": "v", "target": "u+", "coverage": 1, "sources": [{"class": "s+", "fiber": 1}]},
            {"at": "v", "target": "u-", "coverage": 2, "sources": [{"class": "s-", "fiber": 2}]},
        ],
    },
})

_LINE_IDENTITY = _doc({
    "name": "line_identity",
    "upstairs": {
        "vertex_types": ["v"],
        "edge_classes": [
            {"id": "f", "from": "v", "to": "v", "reverse": "b", "mult": 1},
            {"id": "b", "from": "v", "to": "v", "reverse": "f", "mult": 1},
        ],
    },
    "downstairs": {
        "vertex_types": ["w"],
        "edge_classes": [
            {"id": "r", "from": "w", "to": "w", "reverse": "l", "mult": 1},
            {"id": "l", "from": "w", "to": "w", "reverse": "r", "mult": 1},
        ],
    },
    "q": {
        "vertex_map": {"v": "w"},
        "cells": [
            {"at": "v", "target": "r", "coverage": 1, "sources": [{"class": "f", "fiber": 1}]},
            {"at": "v", "target": "l", "coverage": 1, "sources": [{"class": "b", "fiber": 1}]},
        ],
    },
})


_ENTRIES = {
    "two_rose": CorpusEntry(
        name="two_rose",
        document=_TWO_ROSE,
        expected=(
            Expectation("up_interior_degree", 7, "known"),
            Expectation("down_interior_degree", 4, "known"),
            Expectation("locally_surjective", True, "known"),
            Expectation("locally_injective", False, "known"),
            Expectation("classification", "all_faced", "derived"),
            Expectation("sigma1", "empty", "known"),
        ),
    ),
    "free_product": CorpusEntry(
        name="free_product",
        document=_FREE_PRODUCT,
        expected=(
            Expectation("up_star_size", "omega", "known"),
            Expectation("down_interior_degree", 4, "known"),
            Expectation("locally_surjective", True, "known"),
            Expectation("locally_injective", False, "known"),
            Expectation("classification", "all_faced", "derived"),
            Expectation("sigma1", "empty", "known"),
        ),
    ),
    "bs24_to_bs12": CorpusEntry(
        name="bs24_to_bs12",
        document=_BS24_TO_BS12,
        expected=(
            Expectation("up_interior_degree", 6, "construction"),
            Expectation("down_interior_degree", 3, "construction"),
            Expectation("locally_surjective", True, "known"),
            Expectation("locally_injective", False, "known"),
            Expectation("classification", "all_faced", "derived"),
            Expectation("sigma1", "empty", "derived"),
        ),
    ),
    "ascending_synthetic": CorpusEntry(
        name="ascending_synthetic",
        document=_ASCENDING_SYNTHETIC,
        expected=(
            Expectation("up_interior_degree", 5, "construction"),
            Expectation("down_interior_degree", 3, "construction"),
            Expectation("locally_surjective", True, "construction"),
            Expectation("locally_injective", False, "construction"),
            Expectation("classification", "unique_candidate", "derived"),
            Expectation("candidate_cycle", ["u+"], "derived"),
            Expectation("sigma1", "at_most_one", "derived"),
        ),
    ),
    "line_identity": CorpusEntry(
        name="line_identity",
        document=_LINE_IDENTITY,
        expected=(
            Expectation("locally_surjective", True, "construction"),
            Expectation("locally_injective", True, "construction"),
            Expectation("sigma1", "unknown", "construction"),
        ),
    ),
}


def corpus_names() -> list[str]:
    return sorted(_ENTRIES)


def load_example(name: str) -> CorpusEntry:
    """Look up a built-in entry; unknown names list what is available."""
    try:
        return _ENTRIES[name]
    except KeyError:
        raise SigmatreeError(
            f"unknown example {name!r}; available: {', '.join(corpus_names())}"
        ) from None


def all_entries() -> list[CorpusEntry]:
    return [_ENTRIES[n] for n in corpus_names()]
