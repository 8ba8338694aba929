"""
Tests for the graph containers: edges, snapshots, states and actions.
"""
import math

import numpy as np
import pytest

from NetFlowRL.exceptions import DomainError
from NetFlowRL.graph import CommodityState, Edge, FlowAction, Graph, Shipment, load_graph, save_graph


class TestGraph:
    """Construction, validation and neighbour queries."""

    def test_indexing(self, square_graph):
        assert square_graph.n_nodes == 4
        assert square_graph.n_edges == 6
        assert square_graph.node_index(3) == 3
        assert square_graph.edge_index(1, 2) == 1
        assert sorted(square_graph.successors(0)) == [1, 2]
        assert sorted(square_graph.predecessors(3)) == [1, 2]

    def test_rejects_bad_edges(self):
        with pytest.raises(DomainError, match="unknown node"):
            Graph([0, 1], [(0, 5)])
        with pytest.raises(DomainError, match="self-loop"):
            Graph([0, 1], [(1, 1)])
        with pytest.raises(DomainError, match="travel time"):
            Graph([0, 1], [Edge(0, 1, 0)])
        with pytest.raises(DomainError, match="capacity"):
            Graph([0, 1], [Edge(0, 1, 1, 0.0, -1.0)])
        with pytest.raises(DomainError, match="duplicate"):
            Graph([0, 0], [])

    def test_self_loops_when_allowed(self):
        g = Graph([0], [(0, 0)], allow_self_loops=True)
        assert g.n_edges == 1

    def test_unknown_node_lookup(self, square_graph):
        with pytest.raises(DomainError):
            square_graph.node_index(42)
        with pytest.raises(DomainError):
            square_graph.edge_index(3, 1)

    def test_activity_masks(self, square_graph):
        g = square_graph.with_activity(node_active=[True, True, False, True])
        # edges touching node 2 are unusable even though they are active
        assert g.active_edge_mask().tolist() == [True, False, False, True, False, True]
        assert g.successors(0) == [1]
        assert g.active_nodes() == [0, 1, 3]
        with pytest.raises(DomainError, match="shape"):
            square_graph.with_activity(edge_active=[True])

    def test_edge_attributes(self, square_graph):
        g = square_graph.with_edge_attributes(travel_time=[2] * 6, capacity=[5.0] * 6)
        assert g.travel_times.tolist() == [2] * 6
        assert g.capacities.tolist() == [5.0] * 6
        assert g.costs.tolist() == square_graph.costs.tolist()

    def test_networkx_view(self, square_graph):
        g = square_graph.to_networkx()
        assert g.number_of_nodes() == 4
        assert g.number_of_edges() == 6
        assert g[1][2]["time"] == 2

    def test_json_document(self, square_graph, tmp_path):
        path = tmp_path / "graph.json"
        save_graph(square_graph, path)
        loaded = load_graph(path)
        assert loaded.nodes == square_graph.nodes
        assert loaded.edges == square_graph.edges
        assert math.isinf(loaded.edges[0].capacity)

    def test_document_needs_nodes_and_edges(self):
        with pytest.raises(DomainError, match="nodes"):
            Graph.from_dict({"nodes": [0]})
        with pytest.raises(DomainError, match="missing field"):
            Edge.from_dict({"src": 0})


class TestCommodityState:

    def test_vector_becomes_matrix(self):
        s = CommodityState([1.0, 2.0])
        assert s.quantities.shape == (2, 1)
        assert s.n_commodities == 1

    def test_masses(self):
        s = CommodityState([1.0, 2.0], (Shipment(3, 0, 0, 4.0),))
        assert s.on_node_mass() == 3.0
        assert s.in_transit_mass() == 4.0
        assert s.total_mass() == 7.0

    def test_shipments_are_ordered(self):
        s = CommodityState([0.0, 0.0], (Shipment(5, 1, 0, 1.0), Shipment(2, 0, 0, 1.0), Shipment(2, 1, 0, 1.0)))
        assert [(x.arrival_step, x.node) for x in s.in_transit] == [(2, 0), (2, 1), (5, 1)]

    def test_pipeline(self):
        s = CommodityState([0.0, 0.0], (Shipment(1, 0, 0, 2.0), Shipment(3, 1, 0, 5.0)))
        pipe = s.pipeline(3)
        assert pipe[0, 0, 0] == 2.0
        assert pipe[2, 1, 0] == 5.0
        assert pipe.sum() == 7.0

    def test_rejects_higher_rank(self):
        with pytest.raises(DomainError):
            CommodityState(np.zeros((2, 2, 2)))


def test_flow_action_in_and_out(square_graph):
    flows = FlowAction([1.0, 0.0, 0.0, 0.0, 2.0, 0.0])
    np.testing.assert_array_equal(flows.outflow(square_graph)[:, 0], [3.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(flows.inflow(square_graph)[:, 0], [0.0, 1.0, 2.0, 0.0])
