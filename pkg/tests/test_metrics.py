"""Evaluation indexes: dissemination ratios, convergence, CvM, CCDF."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cogsim.metrics import (
    CvmResult,
    coverage,
    coverage_convergence,
    cvm_two_sample,
    degree_ccdf,
    degree_sample,
    f_measure,
    items_per_tag,
    knowledge_dissemination,
    mean_edge_weight,
    _cvm_statistic,
)
from cogsim.semantic import EdgeState, SemanticNetwork, TaggedItem


def item(item_id, *tags):
    return TaggedItem.from_raw(item_id, tags)


def net_from(items):
    return SemanticNetwork.build_initial(items, t0=0.0)


def net_with_vertices(*vertices):
    net = SemanticNetwork()
    for v in vertices:
        net.add_vertex(v)
    return net


# Frozen degree-like samples whose statistic reproduces the published
# (0.157223, 0.368298) pair of the structural comparison table.
CVM_FIXTURE_A = [
    2, 7, 2, 5, 1, 1, 2, 6, 7, 6, 3, 5, 4, 5, 6, 5, 4, 4, 1, 2, 3, 5, 2, 4,
    8, 2, 8, 2, 6, 2, 8, 2, 5, 4, 5, 4, 3, 8, 2, 5, 6, 7, 5, 2, 7, 2, 6, 3,
    6, 5, 4, 7, 2, 4, 5, 3, 3, 2, 4, 8,
]
CVM_FIXTURE_B = [
    3, 5, 3, 7, 5, 6, 7, 5, 7, 5, 4, 6, 3, 10, 2, 3, 5, 8, 4, 4, 3, 6, 8, 3,
    2, 8, 6, 3, 1, 5, 6, 4, 5, 5, 2, 2, 6, 3, 1, 4, 6, 4, 4, 8, 4, 3, 2, 2,
    2, 5, 5, 2, 4, 5, 3, 8, 6, 3, 5, 5, 5, 4, 3, 3, 4, 7, 5, 2, 3, 6, 6, 4,
    3, 8, 4, 9, 2, 6, 3, 4, 4, 5, 5, 2, 3, 3, 2, 7, 3, 4, 2, 5, 5, 4, 6, 3,
    9, 4, 6, 7, 3, 3, 2, 6, 4, 3, 6, 2, 5, 4, 4, 5, 1, 5, 5, 4, 6, 4, 5, 3,
    4, 3, 7, 3, 5, 2, 2, 2, 5, 3, 4, 3, 4, 8, 5, 3, 3, 5, 2, 5, 6, 6, 7, 5,
    5, 5, 6, 6, 5, 3, 6, 9, 1, 7, 3, 4, 2, 3, 6, 4, 2, 4, 2, 3, 3, 3, 3, 5,
    4, 2, 5, 5, 2, 6, 6, 3, 6, 3, 4, 1, 4, 4, 6, 2, 4, 6, 5, 5, 4, 5, 3, 5,
    5, 5, 7, 5, 3, 5, 5, 8, 5, 3, 2, 1, 4, 5, 2, 2, 6, 2, 6, 3, 3, 5, 7, 3,
    4, 6, 7, 5, 5,
]


def omniscient_fixture():
    """Every node holds the full global graph and every matching item."""
    items = [item("i1", "a", "b"), item("i2", "b", "c"), item("i3", "a", "c")]
    nodes = []
    for _ in range(3):
        net = net_from(items)
        nodes.append((net, list(items)))
    return items, nodes


class TestKnowledgeDissemination:
    def test_omniscient_is_one(self):
        items, nodes = omniscient_fixture()
        networks = [net for net, _ in nodes]
        assert knowledge_dissemination(networks, 3) == 1

    def test_all_empty_is_zero(self):
        networks = [SemanticNetwork() for _ in range(4)]
        assert knowledge_dissemination(networks, 10) == 0

    def test_direct_arithmetic(self):
        # nodes holding 3 and 1 of 4 global vertices -> (0.75 + 0.25) / 2
        n1 = net_with_vertices("a", "b", "c")
        n2 = net_with_vertices("d")
        assert knowledge_dissemination([n1, n2], 4) == Fraction(1, 2)

    def test_empty_global_graph_rejected(self):
        with pytest.raises(ValueError):
            knowledge_dissemination([SemanticNetwork()], 0)


class TestCoverage:
    def test_omniscient_is_one(self):
        items, nodes = omniscient_fixture()
        dv = items_per_tag(items)
        assert coverage(nodes, dv) == 1

    def test_single_tag_fraction(self):
        # node knows tag v and owns 1 of the 4 items tagged v -> 0.25
        all_items = [item(f"i{k}", "v", f"other{k}") for k in range(4)]
        dv = items_per_tag(all_items)
        node_net = net_with_vertices("v")
        views = [(node_net, [all_items[0]])]
        assert coverage(views, dv) == Fraction(1, 4)

    def test_empty_networks_zero(self):
        all_items = [item("i1", "v")]
        dv = items_per_tag(all_items)
        views = [(SemanticNetwork(), [all_items[0]]) for _ in range(3)]
        assert coverage(views, dv) == 0

    def test_exactness(self):
        # thirds and sevenths stay exact in rational arithmetic
        all_items = [item(f"i{k}", "v") for k in range(3)] + [
            item(f"j{k}", "w") for k in range(7)
        ]
        dv = items_per_tag(all_items)
        net = net_with_vertices("v", "w")
        views = [(net, [all_items[0], all_items[3]])]
        assert coverage(views, dv) == (Fraction(1, 3) + Fraction(1, 7)) / 2


class TestFMeasure:
    def test_perfect_match(self):
        items = [item("i1", "a", "b")]
        net = net_from(items)
        assert f_measure([(net, items)]) == 1

    def test_two_thirds(self):
        # precision 1, recall 0.5 -> F = 2/3
        items = [item("i1", "a", "b")]
        net = net_with_vertices("a", "b", "c", "d")
        assert f_measure([(net, items)]) == Fraction(2, 3)

    def test_empty_intersection(self):
        items = [item("i1", "a")]
        net = net_with_vertices("z")
        assert f_measure([(net, items)]) == 0

    def test_no_items_or_no_vertices(self):
        net = net_with_vertices("a")
        assert f_measure([(net, [])]) == 0
        assert f_measure([(SemanticNetwork(), [item("i", "a")])]) == 0


class TestMeanEdgeWeight:
    def test_empty_is_zero(self):
        assert mean_edge_weight([SemanticNetwork()], now=0.0, gamma=0.01) == 0.0

    def test_pooled_mean(self):
        half_life = math.log(2.0) / 0.01
        n1 = SemanticNetwork()
        n1.add_vertex("a")
        n1.add_vertex("b")
        n1._insert_edge("a", "b", EdgeState(0.0, 1))  # weight 1 at t=0
        n2 = SemanticNetwork()
        n2.add_vertex("x")
        n2.add_vertex("y")
        n2._insert_edge("x", "y", EdgeState(-half_life, 1))  # weight 0.5
        got = mean_edge_weight([n1, n2], now=0.0, gamma=0.01)
        assert got == pytest.approx(0.75, rel=1e-12)


class TestCoverageConvergence:
    def test_constant_series(self):
        series = [(0.0, Fraction(1, 2)), (5.0, Fraction(1, 2)), (10.0, Fraction(1, 2))]
        assert coverage_convergence(series) == (Fraction(1, 2), 0.0)

    def test_strictly_increasing(self):
        series = [(0.0, 1), (5.0, 2), (10.0, 3)]
        assert coverage_convergence(series) == (3, 10.0)

    def test_published_convergence_point(self):
        # series shaped like the crowded-scenario coverage run: rises until
        # t=2105, then holds 0.987 to the end of the 25000 s simulation.
        final = Fraction(987, 1000)
        series = []
        t = 0.0
        while t <= 25000.0:
            if t < 2105.0:
                series.append((t, final * Fraction(int(t), 2105)))
            else:
                series.append((t, final))
            t += 5.0
        value, when = coverage_convergence(series)
        assert float(value) == pytest.approx(0.987, abs=1e-12)
        assert when == 2105.0

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            coverage_convergence([])


class TestDegreeCcdf:
    def test_triangle(self):
        net = net_from([item("p", "a", "b", "c")])
        assert degree_ccdf(net) == [(2, 1.0)]

    def test_star(self):
        net = net_from([item("p1", "hub", "s1"), item("p2", "hub", "s2"), item("p3", "hub", "s3")])
        assert degree_ccdf(net) == [(1, 1.0), (3, 0.25)]

    def test_empty(self):
        assert degree_ccdf(SemanticNetwork()) == []

    def test_non_increasing_on_random_graph(self):
        rnd = random.Random(5)
        net = SemanticNetwork()
        labels = [f"v{i}" for i in range(20)]
        for v in labels:
            net.add_vertex(v)
        for i in range(20):
            for j in range(i + 1, 20):
                if rnd.random() < 0.2:
                    net._insert_edge(labels[i], labels[j], EdgeState(0.0, 1))
        ccdf = degree_ccdf(net)
        probs = [p for _, p in ccdf]
        assert probs == sorted(probs, reverse=True)
        assert probs[0] == 1.0


class TestCvm:
    def test_identical_samples(self):
        res = cvm_two_sample([1, 2, 2, 3, 4] * 5, [1, 2, 2, 3, 4] * 5)
        assert res.statistic == 0.0
        assert not res.reject_at_95

    def test_published_statistic_and_pvalue(self):
        res = cvm_two_sample(CVM_FIXTURE_A, CVM_FIXTURE_B)
        assert res.statistic == pytest.approx(0.157223, abs=5e-4)
        assert res.p_value == pytest.approx(0.368298, abs=1e-3)
        assert not res.reject_at_95

    def test_clearly_different_laws_rejected(self):
        # degree-2 ring vs star degrees, checked against a permutation oracle
        ring = [2] * 24
        star = [1] * 23 + [23]
        res = cvm_two_sample(ring, star)
        assert res.reject_at_95
        # Monte-Carlo permutation oracle (10^4 permutations)
        rng = np.random.default_rng(9)
        pooled = np.array(ring + star, dtype=float)
        stat = _cvm_statistic(np.array(ring, float), np.array(star, float))
        hits = 1
        perms = 10_000
        for _ in range(perms):
            perm = rng.permutation(pooled)
            if _cvm_statistic(perm[:24], perm[24:]) >= stat - 1e-12:
                hits += 1
        p_perm = hits / (perms + 1)
        assert p_perm < 0.05

    def test_symmetry(self):
        rnd = np.random.default_rng(3)
        a = rnd.poisson(3.0, 40).astype(float)
        b = rnd.poisson(4.0, 55).astype(float)
        r1 = cvm_two_sample(a, b)
        r2 = cvm_two_sample(b, a)
        assert r1.statistic == pytest.approx(r2.statistic, abs=1e-15)
        assert r1.p_value == pytest.approx(r2.p_value, abs=1e-12)

    def test_small_samples_use_permutation(self):
        # identical tiny samples: permutation p-value must not reject
        res = cvm_two_sample([1, 2, 3, 4], [1, 2, 3, 4])
        assert res.statistic == 0.0
        assert res.p_value > 0.5

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            cvm_two_sample([], [1.0])

    def test_matches_scipy_on_continuous_data(self):
        from scipy.stats import cramervonmises_2samp

        rnd = np.random.default_rng(17)
        for _ in range(50):
            x = rnd.normal(size=int(rnd.integers(21, 60)))
            y = rnd.normal(size=int(rnd.integers(21, 60)))
            res = cvm_two_sample(x, y)
            ref = cramervonmises_2samp(x, y)
            assert res.statistic == pytest.approx(ref.statistic, abs=1e-12)


class TestReadOnly:
    def test_metrics_do_not_mutate_state(self):
        items = [item("i1", "a", "b"), item("i2", "b", "c")]
        net = net_from(items)
        before = net.to_snapshot_text(0, 0.0)
        dv = items_per_tag(items)
        knowledge_dissemination([net], 3)
        coverage([(net, items)], dv)
        f_measure([(net, items)])
        mean_edge_weight([net], 100.0, 0.01)
        degree_ccdf(net)
        cvm_two_sample(degree_sample(net), degree_sample(net))
        assert net.to_snapshot_text(0, 0.0) == before
