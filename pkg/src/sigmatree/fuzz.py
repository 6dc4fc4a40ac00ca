"""Random valid tree pairs for property testing.

The generator samples the regime where type-level answers are concretely
realizable without extra equivariance data: one upstairs type per
downstairs type (identity vertex map) and, per downstairs direction,
either no collapsing at all or collapsing cells covering the whole
multiplicity.  That keeps every mark fully marked, so the classifier and
the brute-force oracles must agree exactly.

Coherence filters resample the rare shapes whose classification could
not come from any honest tree pair (several viability cycles, or a
candidate cycle stepping through multiplicity the at-most-one-end
property forbids); a stats record reports how often that happened.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .classify import classify_ends
from .model import PTP, applicability_check, parse_and_validate
from .multiplicity import capped
import json


@dataclass
class FuzzStats:
    attempts: int = 0
    rejected_budget: int = 0
    rejected_structure: int = 0
    rejected_coherence: int = 0
    notes: list[str] = field(default_factory=list)


def _build_downstairs(rng: random.Random, max_types: int, max_mult: int,
                      max_down_star: int):
    k = rng.randint(1, max_types)
    classes = []  # dicts with id/from/to/reverse/mult
    star = [0] * k

    def room(v, need):
        return star[v] + need <= max_down_star

    def add_pair(a, b, ma, mb, tag):
        classes.append({"id": f"d{tag}", "from": f"T{a}", "to": f"T{b}",
                        "reverse": f"d{tag}r", "mult": ma})
        classes.append({"id": f"d{tag}r", "from": f"T{b}", "to": f"T{a}",
                        "reverse": f"d{tag}", "mult": mb})
        star[a] += ma
        star[b] += mb

    tag = 0
    for i in range(1, k):
        a = rng.randrange(i)
        ma = rng.randint(1, min(2, max_mult))
        mb = rng.randint(1, min(2, max_mult))
        if not (room(a, ma) and room(i, mb)):
            return None
        add_pair(a, i, ma, mb, tag)
        tag += 1
    n_extra = rng.randint(0 if k > 1 else 1, 2)
    for _ in range(n_extra):
        a = rng.randrange(k)
        if rng.random() < 0.2 and room(a, 2):
            # self-paired loop class (its own reverse)
            m = rng.randint(1, min(max_mult, max_down_star - star[a]))
            classes.append({"id": f"s{tag}", "from": f"T{a}", "to": f"T{a}",
                            "reverse": f"s{tag}", "mult": m})
            star[a] += m
            tag += 1
            continue
        b = rng.randrange(k)
        ma = rng.randint(1, max_mult)
        mb = rng.randint(1, max_mult)
        if room(a, ma) and (a != b and room(b, mb) or a == b and room(a, ma + mb)):
            add_pair(a, b, ma, mb, tag)
            tag += 1
    # no leaf types: every star needs >= 2
    for v in range(k):
        while star[v] < 2:
            if star[v] + 2 <= max_down_star:
                add_pair(v, v, 1, 1, tag)
                tag += 1
            else:
                return None
    return k, classes, star


def _geometric_sides(classes):
    """Each geometric class yields one or two directed sides."""
    seen = set()
    out = []
    by_id = {c["id"]: c for c in classes}
    for c in classes:
        if c["id"] in seen:
            continue
        seen.add(c["id"])
        rev = by_id[c["reverse"]]
        if rev["id"] == c["id"]:
            out.append((c, None))
        else:
            seen.add(rev["id"])
            out.append((c, rev))
    return out


def random_ptp_document(rng: random.Random, max_types: int = 4,
                        max_mult: int = 5, max_down_star: int = 4,
                        max_up_star: int = 6) -> str | None:
    """One attempt at a valid, applicable document; None when the draw
    cannot satisfy the budgets."""
    built = _build_downstairs(rng, max_types, max_mult, max_down_star)
    if built is None:
        return None
    k, classes, _ = built
    up_star = [0] * k
    up_classes = []
    cells = []
    any_collapsed = False
    tidx = {f"T{i}": i for i in range(k)}

    def emit_side(side, uid_base, n_sources, collapsed):
        """Cells and upstairs classes over one directed class."""
        nonlocal any_collapsed
        v = tidx[side["from"]]
        mult = side["mult"]
        ups = []
        if collapsed:
            fibers = []
            for i in range(n_sources):
                want_two = rng.random() < 0.75 or n_sources > 1
                fibers.append(1 if (n_sources > 1 and i > 0 and rng.random() < 0.5)
                              else (2 if want_two else 3))
            if sum(fibers) < 2:
                fibers[0] += 1
            cost = mult * sum(fibers)
            if up_star[v] + cost > max_up_star:
                return None
            up_star[v] += cost
            srcs = []
            for i, f in enumerate(fibers):
                uid = f"{uid_base}.{i}"
                ups.append((uid, mult * f))
                srcs.append({"class": uid, "fiber": f})
            cells.append({"at": f"T{v}", "target": side["id"],
                          "coverage": mult, "sources": srcs})
            any_collapsed = True
        else:
            if n_sources > mult:
                return None
            if up_star[v] + mult > max_up_star:
                return None
            up_star[v] += mult
            parts = [1] * n_sources
            for _ in range(mult - n_sources):
                parts[rng.randrange(n_sources)] += 1
            for i, kk in enumerate(parts):
                uid = f"{uid_base}.{i}"
                ups.append((uid, kk))
                cells.append({"at": f"T{v}", "target": side["id"],
                              "coverage": kk,
                              "sources": [{"class": uid, "fiber": 1}]})
        return ups

    for c, rev in _geometric_sides(classes):
        both = [c] if rev is None else [c, rev]
        collapsed_flags = [rng.random() < 0.45 for _ in both]
        min_mult = min(s["mult"] for s in both)
        n_sources = 2 if (rng.random() < 0.25
                          and all(f or m >= 2 for f, m in
                                  zip(collapsed_flags, [s["mult"] for s in both]))
                          ) else 1
        if rev is None and n_sources == 1 and c["from"] != c["to"]:
            n_sources = 1  # self-paired classes are loops by validation
        emitted = []
        for side, coll in zip(both, collapsed_flags):
            ups = emit_side(side, side["id"], n_sources, coll)
            if ups is None:
                return None
            emitted.append(ups)
        if rev is None:
            ups = emitted[0]
            if n_sources == 2:
                a, b = ups[0][0], ups[1][0]
                for uid, m in ups:
                    up_classes.append({"id": uid, "from": c["from"], "to": c["to"],
                                       "reverse": b if uid == a else a, "mult": m})
            else:
                uid, m = ups[0]
                up_classes.append({"id": uid, "from": c["from"], "to": c["to"],
                                   "reverse": uid, "mult": m})
        else:
            for (uid, m), (ruid, rm) in zip(emitted[0], emitted[1]):
                up_classes.append({"id": uid, "from": c["from"], "to": c["to"],
                                   "reverse": ruid, "mult": m})
                up_classes.append({"id": ruid, "from": rev["from"], "to": rev["to"],
                                   "reverse": uid, "mult": rm})
    if not any_collapsed:
        return None
    doc = {
        "name": f"fuzz_{rng.randrange(10**9)}",
        "upstairs": {
            "vertex_types": [f"T{i}" for i in range(k)],
            "edge_classes": up_classes,
        },
        "downstairs": {
            "vertex_types": [f"T{i}" for i in range(k)],
            "edge_classes": classes,
        },
        "q": {
            "vertex_map": {f"T{i}": f"T{i}" for i in range(k)},
            "cells": cells,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def up_ball_size(ptp: PTP, base_type: str, radius: int, omega_cap: int = 4) -> int:
    """Exact vertex count of the radius-R up ball (by type-level counting)."""
    graph = ptp.upstairs
    caps = {cid: capped(c.mult, omega_cap) for cid, c in graph.classes.items()}
    layer = {}
    for c in graph.star(base_type):
        layer[c.id] = layer.get(c.id, 0) + caps[c.id]
    total = 1 + sum(layer.values())
    for _ in range(1, radius):
        nxt = {}
        for cid, count in layer.items():
            at = graph.classes[cid].dst
            rev = graph.classes[cid].reverse
            for c2 in graph.star(at):
                n = caps[c2.id] - (1 if c2.id == rev else 0)
                if n > 0:
                    nxt[c2.id] = nxt.get(c2.id, 0) + count * n
        layer = nxt
        total += sum(layer.values())
    return total


def _coherent(ptp: PTP) -> bool:
    classification, dg = classify_ends(ptp)
    if classification.kind == "inconclusive":
        return False
    if classification.kind == "unique_candidate":
        down = ptp.downstairs
        for cyc in dg.cycles:
            for (v, d), (v2, d2) in zip(cyc, cyc[1:] + cyc[:1]):
                avail = down.classes[d2].mult - (
                    1 if down.classes[d].reverse == d2 else 0
                )
                if avail != 1:
                    return False
    return True


def random_endspec(rng: random.Random, ptp: PTP, base_type: str | None = None,
                   max_prefix: int = 3, max_cycle: int = 4, tries: int = 80):
    """A random eventually periodic end of the downstairs tree, or None.

    Sampled as a random non-backtracking class walk whose tail closes up
    into a cycle; instance indices are attached canonically.
    """
    from .classify import endspec_from_classes
    from .errors import SigmatreeError

    down = ptp.downstairs
    for _ in range(tries):
        base = base_type or rng.choice(sorted(down.vertex_types))
        lp = rng.randint(0, max_prefix)
        lc = rng.randint(1, max_cycle)
        classes = []
        at, prev = base, None
        ok = True
        for _ in range(lp + lc):
            choices = [
                c.id for c in down.star(at)
                if not (prev is not None
                        and down.classes[prev].reverse == c.id and c.mult < 2)
            ]
            if not choices:
                ok = False
                break
            cid = rng.choice(choices)
            classes.append(cid)
            prev = cid
            at = down.classes[cid].dst
        if not ok:
            continue
        prefix, cycle = classes[:lp], classes[lp:]
        if down.classes[cycle[0]].src != down.classes[cycle[-1]].dst:
            continue
        if down.classes[cycle[-1]].reverse == cycle[0] and \
                down.classes[cycle[0]].mult < 2:
            continue
        try:
            return endspec_from_classes(ptp, base, prefix, cycle)
        except SigmatreeError:
            continue
    return None


def random_applicable_ptp(rng: random.Random, stats: FuzzStats | None = None,
                          max_types: int = 4, max_mult: int = 5,
                          max_down_star: int = 4, max_up_star: int = 6,
                          size_radius: int = 0, size_budget: int = 400_000,
                          max_attempts: int = 400) -> PTP:
    """Draw valid applicable tree pairs until one passes every filter."""
    stats = stats if stats is not None else FuzzStats()
    for _ in range(max_attempts):
        stats.attempts += 1
        text = random_ptp_document(rng, max_types, max_mult, max_down_star,
                                   max_up_star)
        if text is None:
            stats.rejected_structure += 1
            continue
        ptp = parse_and_validate(text)
        app = applicability_check(ptp)
        if not app.main_theorem_applies:
            stats.rejected_structure += 1
            continue
        if not _coherent(ptp):
            stats.rejected_coherence += 1
            continue
        if size_radius:
            base = sorted(ptp.upstairs.vertex_types)[0]
            if max(
                up_ball_size(ptp, b, size_radius)
                for b in ptp.upstairs.vertex_types
            ) > size_budget:
                stats.rejected_budget += 1
                continue
        return ptp
    raise RuntimeError("fuzz generator exhausted its attempt budget")
