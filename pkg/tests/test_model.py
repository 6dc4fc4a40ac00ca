import json

import pytest
from hypothesis import given, strategies as st

from sigmatree.errors import PTPValidationError
from sigmatree.model import (applicability_check, local_properties,
                             parse_and_validate, serialize_ptp,
                             validate_document)
from sigmatree.multiplicity import OMEGA, capped, mult_to_doc, parse_mult

from conftest import make_doc


class TestMultiplicity:
    def test_parse_round_trip(self):
        assert parse_mult(3) == 3
        assert parse_mult("omega") is OMEGA
        assert mult_to_doc(OMEGA) == "omega"
        assert mult_to_doc(7) == 7

    def test_parse_rejects(self):
        for bad in (0, -1, 2.5, "3", True, None):
            with pytest.raises(ValueError):
                parse_mult(bad)

    @given(st.integers(min_value=1, max_value=10**6))
    def test_omega_absorbs_products(self, n):
        assert OMEGA * n is OMEGA
        assert n * OMEGA is OMEGA
        assert OMEGA * OMEGA is OMEGA

    @given(st.integers(min_value=-10**6, max_value=10**6))
    def test_omega_dominates(self, k):
        assert OMEGA >= k
        assert OMEGA > k
        assert not OMEGA <= k
        assert k < OMEGA
        assert min(k, OMEGA) == k
        assert min(OMEGA, k) == k

    def test_omega_product_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            OMEGA * 0

    def test_capped_truncates_only_omega(self):
        assert capped(OMEGA, 4) == 4
        assert capped(7, 4) == 7
        assert capped(2, 4) == 2


class TestValidation:
    def test_corpus_entries_validate(self, corpus):
        for entry in corpus.values():
            ptp = entry.ptp
            assert ptp.name == entry.name

    def test_round_trip_corpus(self, corpus):
        for entry in corpus.values():
            ptp = entry.ptp
            assert parse_and_validate(serialize_ptp(ptp)) == ptp

    def test_not_json(self):
        ptp, rep = validate_document("not json {")
        assert ptp is None and not rep.ok
        assert rep.violations[0].code == "malformed"

    def test_unknown_fields_rejected(self):
        doc = json.loads(make_doc())
        doc["extra"] = 1
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any("unknown top-level" in v.message for v in rep.violations)

    def test_broken_involution(self):
        doc = json.loads(make_doc())
        doc["upstairs"]["edge_classes"][0]["reverse"] = "a+"
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "involution" for v in rep.violations)

    def test_product_law_violation(self):
        # mult 2, coverage 1, fiber 3: 1*3 != 2
        doc = json.loads(make_doc())
        doc["upstairs"]["edge_classes"][1]["mult"] = 2
        doc["q"]["cells"][1]["sources"][0]["fiber"] = 3
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "product_law" for v in rep.violations)

    def test_coverage_overflow(self):
        doc = json.loads(make_doc())
        doc["q"]["cells"][0]["coverage"] = 2
        doc["upstairs"]["edge_classes"][0]["mult"] = 2
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "coverage_overflow" for v in rep.violations)

    def test_downstairs_omega_rejected(self):
        doc = json.loads(make_doc())
        doc["downstairs"]["edge_classes"][0]["mult"] = "omega"
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "downstairs_omega" for v in rep.violations)

    def test_reversal_compatibility(self):
        # both upstairs classes over b+, so the reverse maps incompatibly
        doc = json.loads(make_doc())
        doc["q"]["cells"][1]["target"] = "b+"
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code in ("reversal_compatibility", "coverage_overflow")
                   for v in rep.violations)

    def test_star_map_must_be_total(self):
        doc = json.loads(make_doc())
        doc["q"]["cells"] = doc["q"]["cells"][:1]
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any("not a source of any cell" in v.message for v in rep.violations)

    def test_source_in_two_cells_rejected(self):
        doc = json.loads(make_doc())
        doc["q"]["cells"].append(dict(doc["q"]["cells"][0]))
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None

    def test_disconnected_rejected(self):
        doc = json.loads(make_doc())
        doc["downstairs"]["vertex_types"].append("iso")
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "connectivity" for v in rep.violations)

    def test_self_paired_non_loop_rejected(self):
        doc = json.loads(make_doc())
        doc["upstairs"]["vertex_types"] = ["v", "v2"]
        doc["upstairs"]["edge_classes"][0]["to"] = "v2"
        doc["upstairs"]["edge_classes"][0]["reverse"] = "a+"
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is None
        assert any(v.code == "involution" for v in rep.violations)

    def test_leaf_type_is_warning_not_error(self):
        # upstairs star of size 1: validates with a warning, applicability fails
        doc = {
            "name": "leafy",
            "upstairs": {
                "vertex_types": ["v"],
                "edge_classes": [
                    {"id": "c", "from": "v", "to": "v", "reverse": "c", "mult": 1},
                ],
            },
            "downstairs": {
                "vertex_types": ["w"],
                "edge_classes": [
                    {"id": "d", "from": "w", "to": "w", "reverse": "d", "mult": 2},
                ],
            },
            "q": {
                "vertex_map": {"v": "w"},
                "cells": [
                    {"at": "v", "target": "d", "coverage": 1,
                     "sources": [{"class": "c", "fiber": 1}]},
                ],
            },
        }
        ptp, rep = validate_document(json.dumps(doc))
        assert ptp is not None
        assert any("leaf types" in w for w in rep.warnings)
        assert not applicability_check(ptp).upstairs_minimal
        assert not applicability_check(ptp).main_theorem_applies

    def test_partial_marking_warning(self, deficient_doc):
        ptp, rep = validate_document(deficient_doc)
        assert ptp is not None
        assert any("partially marked" in w for w in rep.warnings)

    def test_parse_and_validate_raises_with_report(self):
        with pytest.raises(PTPValidationError) as exc:
            parse_and_validate(make_doc(name=""))
        assert exc.value.report.violations


class TestLocalProperties:
    def test_two_rose(self, two_rose):
        lp = local_properties(two_rose)
        assert lp.locally_surjective and not lp.locally_injective
        collapsed = {(c.sources[0][0], c.target) for c in lp.collapsing_cells}
        assert collapsed == {("s-", "x-"), ("t-", "y-")}

    def test_line_identity(self, line_identity):
        lp = local_properties(line_identity)
        assert lp.locally_injective and lp.locally_surjective

    def test_bs24(self, bs24):
        lp = local_properties(bs24)
        assert lp.locally_surjective and not lp.locally_injective

    def test_deficient(self, deficient_doc):
        ptp = parse_and_validate(deficient_doc)
        lp = local_properties(ptp)
        assert not lp.locally_surjective
        assert ("v", "b+") in lp.deficiencies and ("v", "b-") in lp.deficiencies

    def test_free_product_stars(self, free_product):
        assert free_product.upstairs.star_size("A") is OMEGA
        assert free_product.downstairs.star_size("P") == 4


class TestApplicability:
    def test_corpus_flags(self, corpus):
        expected = {
            "two_rose": True,
            "free_product": True,
            "bs24_to_bs12": True,
            "ascending_synthetic": True,
            "line_identity": False,
        }
        for name, want in expected.items():
            app = applicability_check(corpus[name].ptp)
            assert app.main_theorem_applies == want, name

    def test_line_identity_fails_on_injectivity(self, line_identity):
        app = applicability_check(line_identity)
        assert app.upstairs_minimal
        assert app.locally_surjective
        assert not app.not_locally_injective


class TestStarConservation:
    def test_every_corpus_entry(self, corpus):
        from sigmatree.multiplicity import is_omega, mult_sum

        for entry in corpus.values():
            ptp = entry.ptp
            for vtype in ptp.upstairs.vertex_types:
                total = mult_sum(
                    cell.coverage * f if not is_omega(f) else OMEGA
                    for cell in ptp.cells_at(vtype)
                    for _, f in cell.sources
                )
                assert total == ptp.upstairs.star_size(vtype)
