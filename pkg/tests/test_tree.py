import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mckernel.tree import (
    InstanceError,
    NodeClass,
    Verdict,
    build_instance,
    caterpillar_decomposition,
    caterpillar_wingspan,
    classify_nodes,
    contract_edge,
    delete_edge,
    directions_from,
    drop_request,
    general_wingspans,
    path_edges,
    quasi_r_neighbors,
    request_predicates,
)

PATH4 = [(1, 2), (2, 3), (3, 4)]


@st.composite
def instances(draw, max_n=12, max_req=8):
    n = draw(st.integers(2, max_n))
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
    reqs = draw(st.lists(pairs, max_size=max_req))
    k = draw(st.integers(0, 4))
    return build_instance(edges, reqs, k)


class TestBuild:
    def test_minimal_tree_is_open(self):
        inst = build_instance([(1, 2)], [(1, 2)], 1)
        assert inst.verdict == Verdict.OPEN

    def test_cycle_rejected(self):
        with pytest.raises(InstanceError, match="cycle"):
            build_instance([(1, 2), (2, 3), (1, 3)], [], 1)

    def test_no_requests_is_true(self):
        assert build_instance([(1, 2)], [], 0).verdict == Verdict.TRUE

    def test_zero_budget_with_requests_is_false(self):
        assert build_instance([(1, 2)], [(1, 2)], 0).verdict == Verdict.FALSE

    @pytest.mark.parametrize("edges, reqs, k", [
        ([(1, 2), (3, 4)], [], 1),       # disconnected
        ([(1, 1)], [], 1),                # self-loop
        ([(1, 2)], [(1, 5)], 1),          # unknown endpoint
        ([(1, 2)], [(1, 1)], 1),          # self-request
        ([(1, 2)], [], -1),               # negative budget
        ([], [], 1),                      # no nodes
    ])
    def test_invalid_inputs(self, edges, reqs, k):
        with pytest.raises(InstanceError):
            build_instance(edges, reqs, k)

    def test_duplicate_requests_merge_keeping_smallest_id(self):
        inst = build_instance(PATH4, [(1, 3), (2, 4), (3, 1)], 2)
        assert [(r.id, r.pair) for r in inst.requests] == [(0, (1, 3)), (1, (2, 4))]

    def test_single_node(self):
        inst = build_instance([], [], 0, nodes=[0])
        assert inst.nodes == {0} and inst.verdict == Verdict.TRUE


class TestPaths:
    def test_path_graph(self):
        inst = build_instance(PATH4, [], 1)
        assert list(path_edges(inst, 1, 4).edges) == [(1, 2), (2, 3), (3, 4)]
        assert list(path_edges(inst, 2, 3).edges) == [(2, 3)]

    def test_star(self):
        inst = build_instance([(0, 1), (0, 2)], [], 1)
        pv = path_edges(inst, 1, 2)
        assert list(pv.edges) == [(0, 1), (0, 2)]
        assert list(pv.internal_nodes) == [0]

    def test_unknown_node(self):
        inst = build_instance(PATH4, [], 1)
        with pytest.raises(InstanceError):
            path_edges(inst, 1, 9)

    @given(instances())
    def test_path_is_simple_and_symmetric(self, inst):
        nodes = sorted(inst.nodes)
        for a in nodes[:3]:
            for b in nodes[-3:]:
                if a == b:
                    continue
                p = inst.node_path(a, b)
                assert p[0] == a and p[-1] == b and len(set(p)) == len(p)
                assert p == inst.node_path(b, a)[::-1]
                assert all(tuple(sorted(e)) in inst.edges for e in zip(p, p[1:]))


class TestRewrites:
    def test_contract_leaf_edge(self):
        inst = contract_edge(build_instance([(1, 2), (2, 3)], [(1, 3)], 1), (1, 2))
        assert inst.edges == {(2, 3)} and [r.pair for r in inst.requests] == [(2, 3)]

    def test_contract_only_edge_drops_request(self):
        inst = contract_edge(build_instance([(1, 2)], [(1, 2)], 1), (1, 2))
        assert inst.nodes == {1} and not inst.requests

    def test_contract_star_edge(self):
        inst = contract_edge(build_instance([(0, 1), (0, 2)], [(1, 2)], 1), (0, 1))
        assert inst.edges == {(0, 2)} and [r.pair for r in inst.requests] == [(0, 2)]

    def test_delete_removes_crossing_requests(self):
        inst = delete_edge(build_instance([(1, 2), (2, 3)], [(1, 3), (2, 3)], 2), (2, 3))
        assert inst.edges == {(1, 2)} and not inst.requests and inst.k == 2

    def test_delete_keeps_other_requests(self):
        inst = delete_edge(build_instance([(1, 2), (2, 3)], [(1, 2)], 1), (2, 3))
        assert inst.edges == {(1, 2)} and [r.pair for r in inst.requests] == [(1, 2)]

    def test_delete_star_spoke(self):
        inst = build_instance([(0, 1), (0, 2), (0, 3)], [(1, 2), (1, 3)], 2)
        assert not delete_edge(inst, (0, 1)).requests

    def test_rewrite_missing_edge(self):
        inst = build_instance(PATH4, [], 1)
        with pytest.raises(InstanceError):
            contract_edge(inst, (1, 3))
        with pytest.raises(InstanceError):
            delete_edge(inst, (1, 4))
        with pytest.raises(InstanceError):
            drop_request(inst, 0)

    @given(instances())
    @settings(max_examples=60)
    def test_contract_keeps_a_tree(self, inst):
        for e in sorted(inst.edges)[:3]:
            out = contract_edge(inst, e)
            assert len(out.edges) == len(out.nodes) - 1
            assert len(out.nodes) == len(inst.nodes) - 1
            assert all(r.u in out.nodes and r.v in out.nodes for r in out.requests)


class TestClassification:
    def test_caterpillar_classes(self):
        # spine a=1, b=2, c=3; x=4 on b; extra leaves 5, 6 keep a and c internal
        inst = build_instance([(1, 2), (2, 3), (2, 4), (1, 5), (3, 6)], [], 1)
        cls = classify_nodes(inst).cls
        assert cls[1] == cls[3] == NodeClass.I1
        assert cls[2] == NodeClass.I2
        assert cls[4] == NodeClass.L2

    def test_spider_centre_is_i3(self):
        inst = build_instance([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)], [], 1)
        assert classify_nodes(inst).cls[0] == NodeClass.I3

    def test_same_group_request_marks_bad_leaves(self):
        edges = [(1, 2), (2, 3), (2, 7), (2, 8), (1, 5), (3, 6)]
        part = classify_nodes(build_instance(edges, [(7, 8)], 1))
        assert part.cls[7] == part.cls[8] == NodeClass.L2PRIME
        assert part.bad == {7, 8}

    def test_pure_caterpillar_is_one_component(self):
        inst = build_instance([(1, 2), (2, 3), (3, 4), (1, 5), (2, 6), (4, 7)], [], 1)
        cats = caterpillar_decomposition(inst)
        assert len(cats) == 1 and cats[0].backbone == (1, 2, 3, 4)
        assert cats[0].extremities == (1, 4)

    def test_spider_three_long_legs(self):
        edges = []
        for leg in range(3):
            prev = 0
            for d in range(1, 4):
                v = 10 * (leg + 1) + d
                edges.append((prev, v))
                prev = v
        assert len(caterpillar_decomposition(build_instance(edges, [], 1))) == 3

    def test_star_is_one_trivial_caterpillar(self):
        cats = caterpillar_decomposition(build_instance([(0, i) for i in range(1, 5)], [], 1))
        assert len(cats) == 1 and cats[0].trivial

    def test_i3_hub_and_its_leaves_excluded(self):
        edges = [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9),
                 (0, 10), (0, 11)]
        inst = build_instance(edges, [], 1)
        cls = classify_nodes(inst).cls
        assert cls[0] == NodeClass.I3 and cls[10] == NodeClass.L3
        comps = caterpillar_decomposition(inst)
        assert len(comps) == 3
        assert all(c.nodes.isdisjoint({0, 10, 11}) for c in comps)

    @given(instances())
    def test_classes_cover_all_nodes(self, inst):
        part = classify_nodes(inst)
        assert set(part.cls) == inst.nodes
        assert part.bad <= inst.leaves


class TestPredicates:
    def setup_method(self):
        self.inst = build_instance([(1, 2), (2, 3), (3, 4), (4, 5)],
                                   [(1, 5), (2, 4), (1, 2), (4, 5), (1, 3), (3, 5)], 3)
        self.r = {r.pair: r for r in self.inst.requests}

    def test_domination_and_common_factor(self):
        rel = request_predicates(self.inst, self.r[(1, 5)], self.r[(2, 4)])
        assert rel.dominates and rel.common_factor == {(2, 3), (3, 4)}

    def test_disjoint_pair(self):
        rel = request_predicates(self.inst, self.r[(1, 2)], self.r[(4, 5)])
        assert rel.disjoint and rel.endpoint_disjoint

    def test_shared_endpoint(self):
        rel = request_predicates(self.inst, self.r[(1, 3)], self.r[(3, 5)])
        assert rel.disjoint and not rel.endpoint_disjoint


class TestDirections:
    def test_leaf_requests_same_direction(self):
        # leaf x=0 on f=1; a=3, b=4 both right of f
        inst = build_instance([(0, 1), (1, 2), (2, 3), (2, 4), (1, 5)], [(0, 3), (0, 4)], 2)
        d = directions_from(inst, 0)
        assert set(d.values()) == {(1, 2)}

    def test_leaf_to_sibling_uses_second_edge(self):
        inst = build_instance([(0, 1), (1, 2), (1, 3)], [(0, 2)], 1)
        assert directions_from(inst, 0) == {0: (1, 2)}

    def test_inner_node_two_ways(self):
        inst = build_instance(PATH4 + [(4, 5)], [(3, 1), (3, 5)], 2)
        assert set(directions_from(inst, 3).values()) == {(2, 3), (3, 4)}


class TestWingspan:
    def caterpillar(self, reqs):
        # spine 0-1-2-3-4, leaves 10+i on node i, extra leaves on the ends
        edges = [(i, i + 1) for i in range(4)] + [(i, 10 + i) for i in range(5)]
        edges += [(0, 20), (4, 24)]
        return build_instance(edges, reqs, 2)

    def test_requests_to_extremity_neighbours_span_whole_backbone(self):
        inst = self.caterpillar([(12, 10), (12, 14)])
        w = caterpillar_wingspan(inst, 12)
        assert w.nodes == {0, 1, 2, 3, 4} and w.bounds == (0, 4)

    def test_missing_side_uses_father(self):
        inst = self.caterpillar([(12, 14)])
        w = caterpillar_wingspan(inst, 12)
        assert w.bounds == (2, 4)

    def test_three_mutual_leaves(self):
        inst = self.caterpillar([(11, 12), (12, 13), (11, 13)])
        assert caterpillar_wingspan(inst, 12).size == 3

    def test_quasi_neighbours_are_anchors(self):
        inst = self.caterpillar([(12, 14), (12, 1)])
        assert quasi_r_neighbors(inst, 12) == {4, 1}

    def test_general_wingspan_pairs(self):
        inst = self.caterpillar([(12, 10), (12, 14), (12, 13)])
        spans = general_wingspans(inst, 12)
        assert [w.neighbors for w in spans] == [(10, 13)]

    def test_non_l2_rejected(self):
        inst = self.caterpillar([])
        with pytest.raises(InstanceError):
            caterpillar_wingspan(inst, 2)
