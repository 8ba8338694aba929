import numpy as np
import pytest

from NetFlowRL.graph import CommodityState, Edge, Graph


@pytest.fixture
def line_graph():
    """Two nodes joined by 0 -> 1 with travel time 1 and unit cost 2"""
    return Graph([0, 1], [Edge(0, 1, 1, 2.0)])


@pytest.fixture
def square_graph():
    """Four nodes on a directed cycle with chords and mixed travel times"""
    edges = [
        Edge(0, 1, 1, 1.0), Edge(1, 2, 2, 1.5), Edge(2, 3, 1, 0.5), Edge(3, 0, 3, 2.0),
        Edge(0, 2, 2, 3.0), Edge(1, 3, 1, 1.0),
    ]
    return Graph([0, 1, 2, 3], edges)


@pytest.fixture
def square_state():
    return CommodityState(np.array([7.0, 3.0, 0.0, 5.0]))
