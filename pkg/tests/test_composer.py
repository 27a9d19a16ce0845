import numpy as np
import pytest

from percussion_quartet.composer import Role, SelectionContext, candidate_set, select_next


def brute_force_candidates(lib, role, own_previous, leader_current):
    """Independent re-statement of the selection rules, by enumeration."""
    all_ids = [p.id for p in lib.patterns]
    if own_previous is None:
        return all_ids
    prev_cat = lib.by_id[own_previous].category
    self_ok = [
        p.id for p in lib.patterns if p.category in lib.transitions.reachable(prev_cat)
    ]
    if role is Role.LEADER:
        pool = self_ok if self_ok else all_ids
        trimmed = [pid for pid in pool if pid != own_previous]
        return trimmed if trimmed else pool
    if leader_current is None:
        return self_ok if self_ok else all_ids
    leader_even = lib.by_id[leader_current].evenness
    leader_ok = [p.id for p in lib.patterns if p.evenness is leader_even]
    both = [pid for pid in self_ok if pid in leader_ok]
    if both:
        return both
    if leader_ok:
        return leader_ok
    return all_ids


def all_contexts(lib):
    ids = [p.id for p in lib.patterns]
    for role in (Role.LEADER, Role.FOLLOWER):
        for prev in ids:
            for leader in [None] + ids:
                yield role, prev, leader


class TestCandidateSet:
    def test_no_history_is_whole_library(self, eight_library):
        ctx = SelectionContext(Role.LEADER, None, None, np.random.default_rng(0))
        assert candidate_set(eight_library, ctx) == [p.id for p in eight_library.patterns]

    def test_leader_excludes_own_previous(self, eight_library):
        ctx = SelectionContext(Role.LEADER, "eq1", None, np.random.default_rng(0))
        cands = candidate_set(eight_library, ctx)
        assert "eq1" not in cands
        assert cands  # never empty

    def test_leader_candidates_within_matrix(self, eight_library):
        lib = eight_library
        ctx = SelectionContext(Role.LEADER, "eq1", None, np.random.default_rng(0))
        reachable = lib.transitions.reachable(lib.by_id["eq1"].category)
        for pid in candidate_set(lib, ctx):
            assert lib.by_id[pid].category in reachable

    def test_follower_shares_leader_evenness(self, eight_library):
        lib = eight_library
        ctx = SelectionContext(Role.FOLLOWER, "eq1", "us1", np.random.default_rng(0))
        for pid in candidate_set(lib, ctx):
            assert lib.by_id[pid].evenness is lib.by_id["us1"].evenness

    def test_never_empty_for_any_context(self, eight_library):
        for role, prev, leader in all_contexts(eight_library):
            ctx = SelectionContext(role, prev, leader, np.random.default_rng(0))
            assert candidate_set(eight_library, ctx), (role, prev, leader)

    def test_matches_brute_force_on_all_contexts(self, eight_library):
        lib = eight_library
        checked = 0
        for role, prev, leader in all_contexts(lib):
            ctx = SelectionContext(role, prev, leader, np.random.default_rng(0))
            got = candidate_set(lib, ctx)
            want = brute_force_candidates(lib, role, prev, leader)
            assert sorted(got) == sorted(want), (role, prev, leader)
            checked += 1
        assert checked == 2 * 8 * 9

    def test_default_library_leader_always_has_choices(self, default_library):
        for p in default_library.patterns:
            ctx = SelectionContext(Role.LEADER, p.id, None, np.random.default_rng(0))
            cands = candidate_set(default_library, ctx)
            assert len(cands) >= 2
            assert p.id not in cands


class TestSelectNext:
    def test_draw_is_from_candidates(self, eight_library):
        rng = np.random.default_rng(7)
        for _ in range(200):
            ctx = SelectionContext(Role.FOLLOWER, "uq1", "eq2", rng)
            pid, rng = select_next(eight_library, ctx)
            assert pid in candidate_set(eight_library, ctx)

    def test_seeded_draws_reproducible(self, eight_library):
        def draws(seed):
            rng = np.random.default_rng(seed)
            out = []
            for _ in range(50):
                ctx = SelectionContext(Role.LEADER, "es1", None, rng)
                pid, rng = select_next(eight_library, ctx)
                out.append(pid)
            return out

        assert draws(11) == draws(11)
        assert draws(11) != draws(12)

    def test_uniform_over_small_candidate_set(self, eight_library):
        from scipy.stats import chisquare

        rng = np.random.default_rng(3)
        counts = {}
        n = 6000
        for _ in range(n):
            ctx = SelectionContext(Role.LEADER, "eq1", None, rng)
            pid, rng = select_next(eight_library, ctx)
            counts[pid] = counts.get(pid, 0) + 1
        cands = candidate_set(
            eight_library, SelectionContext(Role.LEADER, "eq1", None, rng)
        )
        observed = [counts.get(pid, 0) for pid in cands]
        assert chisquare(observed).pvalue > 0.01

    def test_empty_library_rejected(self, eight_library):
        import dataclasses

        empty = dataclasses.replace(eight_library, patterns=())
        ctx = SelectionContext(Role.LEADER, None, None, np.random.default_rng(0))
        with pytest.raises(ValueError):
            candidate_set(empty, ctx)
