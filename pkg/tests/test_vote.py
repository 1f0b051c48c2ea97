"""Majority-vote extension and the truth-initialized oracle trial."""
import numpy as np
import pytest

import blocksketch as bs
from blocksketch.errors import ParameterError
from blocksketch.sbm import UNASSIGNED


def mask_of(indices, n, gamma=0.5, seed=0):
    return bs.SampleMask(kept=np.asarray(sorted(indices), dtype=np.int64),
                         gamma=gamma, seed=seed)


def star(center_edges, n):
    return bs.Graph.from_edges(n, center_edges)


class TestMajorityVote:
    def test_strict_majority(self):
        # node 3 sees sampled neighbors labeled +, +, -
        g = star([(0, 3), (1, 3), (2, 3)], 4)
        out = bs.majority_vote(g, mask_of([0, 1, 2], 4), np.array([1, 1, -1], dtype=np.int8))
        assert out.labels[3] == 1
        assert out.margins[3] == 1
        assert out.tie_count == 0

    def test_exact_tie_unassigned(self):
        g = star([(0, 2), (1, 2)], 3)
        out = bs.majority_vote(g, mask_of([0, 1], 3), np.array([1, -1], dtype=np.int8))
        assert out.labels[2] == UNASSIGNED
        assert out.margins[2] == 0
        assert out.tie_count == 1
        assert not bs.is_complete(out.labels)

    def test_isolated_node_is_tie(self):
        g = star([(0, 1)], 3)
        out = bs.majority_vote(g, mask_of([0, 1], 3), np.array([1, 1], dtype=np.int8))
        assert out.labels[2] == UNASSIGNED
        assert out.tie_count == 1

    def test_sampled_labels_kept_verbatim(self):
        # sampled node 0 keeps label -1 even though its sampled neighbors say +1
        g = star([(0, 1), (0, 2)], 4)
        out = bs.majority_vote(g, mask_of([0, 1, 2], 4),
                               np.array([-1, 1, 1], dtype=np.int8))
        assert out.labels[0] == -1

    def test_incomplete_sample_labels_rejected(self):
        g = star([(0, 1)], 3)
        with pytest.raises(ParameterError):
            bs.majority_vote(g, mask_of([0, 1], 3), np.array([1, 0], dtype=np.int8))
        with pytest.raises(ParameterError):
            bs.majority_vote(g, mask_of([0, 1], 3), np.array([1], dtype=np.int8))

    def test_double_loop_oracle(self):
        # independent recount of e(v, R1) - e(v, R2) on 100 random instances
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(2, 13))
            density = rng.uniform(0.2, 0.9)
            edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                     if rng.uniform() < density]
            g = bs.Graph.from_edges(n, edges)
            k = int(rng.integers(1, n + 1))
            kept = rng.choice(n, size=k, replace=False)
            labels = rng.choice([-1, 1], size=k).astype(np.int8)
            out = bs.majority_vote(g, mask_of(kept, n), labels[np.argsort(kept)])
            by_node = dict(zip(sorted(kept), labels[np.argsort(kept)]))
            eset = g.edge_set
            for v in range(n):
                if v in by_node:
                    assert out.labels[v] == by_node[v]
                    continue
                plus = sum(1 for u in by_node if by_node[u] == 1
                           and (min(u, v), max(u, v)) in eset)
                minus = sum(1 for u in by_node if by_node[u] == -1
                            and (min(u, v), max(u, v)) in eset)
                assert out.margins[v] == plus - minus
                want = 1 if plus > minus else (-1 if minus > plus else UNASSIGNED)
                assert out.labels[v] == want

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        g = bs.sample_sbm(bs.SbmParams.explicit(5, 5, 0.8, 0.3), 2)
        kept = np.array([0, 2, 3, 7])
        labels = np.array([1, -1, 1, -1], dtype=np.int8)
        out = bs.majority_vote(g, mask_of(kept, g.n), labels)
        perm = rng.permutation(g.n)
        pg = bs.Graph.from_edges(g.n, perm[g.edges])
        pk = perm[kept]
        order = np.argsort(pk)
        pout = bs.majority_vote(pg, mask_of(pk, g.n), labels[order])
        assert np.array_equal(pout.labels[perm], out.labels)
        assert np.array_equal(pout.margins[perm], out.margins)

    def test_margin_monotone_in_added_edge(self):
        g = star([(0, 2), (1, 2)], 4)
        mask = mask_of([0, 1, 3], 4)
        labels = np.array([1, -1, 1], dtype=np.int8)
        before = bs.majority_vote(g, mask, labels)
        g2 = bs.Graph.from_edges(4, [(0, 2), (1, 2), (2, 3)])  # new edge to +1 node 3
        after = bs.majority_vote(g2, mask, labels)
        assert after.margins[2] >= before.margins[2]


class TestOracleVoteTrial:
    def test_full_sample_always_succeeds(self):
        params = bs.SbmParams.explicit(3, 3, 1.0, 0.0)
        for seed in range(20):
            g = bs.sample_sbm(params, seed)
            assert bs.oracle_vote_trial(g, 1.0, seed)

    def test_missing_truth_rejected(self):
        g = bs.Graph.from_edges(4, [(0, 1)])
        with pytest.raises(ParameterError):
            bs.oracle_vote_trial(g, 0.5, 0)

    def test_tie_forces_failure(self):
        # node 2 is isolated: any sample that omits it leaves a guaranteed tie
        g = bs.Graph.from_edges(3, [(0, 1)],
                                truth=np.array([1, -1, 1], dtype=np.int8))
        found = False
        for seed in range(200):
            mask = bs.subsample_nodes(3, 0.4, seed)
            if 2 not in set(mask.kept.tolist()) and mask.size >= 1:
                assert not bs.oracle_vote_trial(g, 0.4, seed)
                found = True
                break
        assert found

    def test_disjoint_cliques_half_sample(self):
        params = bs.SbmParams.explicit(20, 20, 1.0, 0.0)
        wins = sum(bs.oracle_vote_trial(bs.sample_sbm(params, s), 0.5, s)
                   for s in range(200))
        assert wins / 200 >= 0.99

    def test_moderate_regime_rate(self):
        params = bs.SbmParams.from_rates(200, 16.0, 2.0)
        wins = sum(
            bs.oracle_vote_trial(bs.sample_sbm(params, bs.seed_sequence(9, t)), 0.7,
                                 bs.seed_sequence(9, t))
            for t in range(40))
        assert wins / 40 >= 0.8

    def test_deterministic(self):
        g = bs.sample_sbm(bs.SbmParams.from_rates(60, 6.0, 1.0), 3)
        assert bs.oracle_vote_trial(g, 0.6, 11) == bs.oracle_vote_trial(g, 0.6, 11)
