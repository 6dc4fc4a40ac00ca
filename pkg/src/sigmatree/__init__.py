"""sigmatree: certified sigma-1 classification for tree quotient maps.

Given finite quotient-level data for an equivariant morphism between
simplicial trees (vertex types, directed edge classes with
multiplicities, star-map cells), the library decides whether the
classification hypotheses hold and certifies either that every end of
the downstairs tree is faced by a collapsing pair (the sigma-1 set is
empty) or that exactly one candidate end escapes (the sigma-1 set is at
most that point), with brute-force ball oracles cross-checking every
step and constructive disconnection witnesses for faced ends.
"""

__version__ = "0.1.0"

from .ball import (Ball, MappedBallPair, RayInstance, ball_to_dot, busemann,
                   busemann_table, expand_pair, geodesic, horoball_filter,
                   pair_to_dot, tree_distance)
from .classify import (Classification, EndSpec, MarkedSet, MarkStatus, Verdict,
                       ViabilityDigraph, canonical_endspec, classify_ends,
                       clean_pairs, clean_pairs_detailed, end_is_faced,
                       endspec_from_classes, marked_classes, parse_endspec,
                       realize_ray, sigma_verdict, viability_digraph)
from .corpus import CorpusEntry, all_entries, corpus_names, load_example
from .errors import (BallBudgetExceeded, BallTooShallow, ConsistencyViolation,
                     EndNotFaced, InconclusiveMarking, PTPValidationError,
                     SigmatreeError)
from .lifting import (LiftTree, base_type_over, lift_initials, lift_ray,
                      q_fiber_singleton, ray_toward_end)
from .model import (ApplicabilityReport, Cell, EdgeClass, LocalProperties, PTP,
                    TypedGraph, ValidationReport, applicability_check,
                    local_properties, parse_and_validate, serialize_ptp,
                    validate_document)
from .multiplicity import OMEGA, Mult, is_omega
from .oracle import (ConeReport, brute_connectivity_check, brute_face_scan,
                     concrete_collapsing_pairs, same_preimage_component,
                     unfaced_vertices)
from .witness import (DisconnectionWitness, disconnection_witness,
                      pigeonhole_bound, translated_marked_edge, verify_witness)

__all__ = [name for name in dir() if not name.startswith("_")]
