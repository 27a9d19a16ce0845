"""Per-robot next-pattern selection under leader-follower rules.

The leader moves to any pattern whose category the compatibility matrix
allows after its previous pattern. A follower additionally filters by the
leader's current pattern: candidates must share the leader's evenness,
falling back to the leader rule alone (and finally the whole library) when
the intersection comes up empty. Selection among candidates is uniform.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .patterns import PatternLibrary


class Role(str, Enum):
    LEADER = "leader"
    FOLLOWER = "follower"


@dataclass
class SelectionContext:
    role: Role
    own_previous: Optional[str]  # None at performance start
    leader_current: Optional[str]  # None when the selector is the leader
    rng: np.random.Generator


def candidate_set(lib: PatternLibrary, ctx: SelectionContext) -> list[str]:
    """Pattern ids the robot may pick next, in library order. Never empty."""
    if not lib.patterns:
        raise ValueError("empty library")
    all_ids = [p.id for p in lib.patterns]
    if ctx.own_previous is None:
        return all_ids

    prev = lib.by_id[ctx.own_previous]
    reachable = lib.transitions.reachable(prev.category)
    self_rule = [p.id for p in lib.patterns if p.category in reachable]

    if ctx.role is Role.LEADER:
        cands = self_rule or all_ids
        without_prev = [pid for pid in cands if pid != ctx.own_previous]
        return without_prev or cands

    if ctx.leader_current is None:
        # Degenerate follower context; only the self rule applies.
        return self_rule or all_ids
    leader = lib.by_id[ctx.leader_current]
    leader_rule = [p.id for p in lib.patterns if p.evenness is leader.evenness]
    both = [pid for pid in self_rule if pid in set(leader_rule)]
    return both or leader_rule or all_ids


def select_next(lib: PatternLibrary, ctx: SelectionContext) -> tuple[str, np.random.Generator]:
    """Uniform draw over candidate_set; advances and returns the rng."""
    cands = candidate_set(lib, ctx)
    idx = int(ctx.rng.integers(len(cands)))
    return cands[idx], ctx.rng
