"""Variable elimination with a min-degree ordering."""

import logging
from typing import Dict, Iterable, List, Optional, Sequence

import networkx as nx

from ..errors import InferenceError
from ..factor import Factor, product
from ..network import BayesNet
from .base import InferenceEngine


logger = logging.getLogger(__name__)


def _check_ids(net: BayesNet, ids: Iterable[int], what: str):
    known = {node.id for node in net.nodes}
    unknown = sorted(set(ids) - known)
    if unknown:
        raise InferenceError(f"unknown {what} nodes {unknown}")


def min_degree_order(moral: nx.Graph, eliminable: Iterable[int]) -> List[int]:
    """Greedy min-degree order over an undirected graph, ties to the smallest id."""
    graph = moral.copy()
    remaining = set(eliminable)
    order = []
    while remaining:
        node = min(remaining, key=lambda v: (graph.degree(v), v))
        neighbours = list(graph.neighbors(node))
        for i, u in enumerate(neighbours):
            for w in neighbours[i + 1 :]:
                graph.add_edge(u, w)
        graph.remove_node(node)
        remaining.remove(node)
        order.append(node)
    return order


def elimination_order(net: BayesNet, query: Iterable[int], evidence: Iterable[int]) -> List[int]:
    """Min-degree order over the moral graph for the non-query, non-evidence nodes.

    Evidence nodes are instantiated, so they are removed from the moral graph
    before degrees are counted.

    Raises:
        InferenceError: on unknown ids, or a node that is both query and evidence.
    """
    query, evidence = set(query), set(evidence)
    _check_ids(net, query, "query")
    _check_ids(net, evidence, "evidence")
    clash = sorted(query & evidence)
    if clash:
        raise InferenceError(f"nodes {clash} are both queried and observed")

    moral = nx.moral_graph(net.graph())
    moral.remove_nodes_from(evidence)
    eliminable = [node.id for node in net.nodes if node.id not in query | evidence]
    return min_degree_order(moral, eliminable)


def relevant_nodes(net: BayesNet, keep: Iterable[int]) -> set:
    """keep plus all its ancestors; every other node is barren and sums out to 1."""
    graph = net.graph()
    relevant = set(keep)
    for node_id in list(relevant):
        relevant |= nx.ancestors(graph, node_id)
    return relevant


def eliminate(factors: Sequence[Factor], order: Sequence[int]) -> Factor:
    """Sum variables out of a factor product in the given order."""
    factors = list(factors)
    for var in order:
        involved = [f for f in factors if var in f.scope]
        if not involved:
            continue
        factors = [f for f in factors if var not in f.scope]
        factors.append(product(involved).sum_out([var]))
    return product(factors)


class VariableElimination(InferenceEngine):
    """Exact inference by variable elimination.

    With ``order=None`` barren nodes are pruned and a min-degree order is
    computed per query; an explicit order must cover exactly the
    non-query, non-evidence nodes of the whole network.

    Example:
        engine = VariableElimination()
        p = engine.posterior(net, net.evidence, net.find("(hang k1)").id)
    """

    def __init__(self, order: Optional[Sequence[int]] = None):
        self.order = None if order is None else list(order)

    def query_weights(self, net: BayesNet, evidence: Dict[int, bool], query: int):
        if self.order is not None:
            expected = {n.id for n in net.nodes} - set(evidence) - {query}
            if len(self.order) != len(expected) or set(self.order) != expected:
                raise InferenceError("elimination order is not a permutation of the eliminable nodes")
            nodes, order = net.nodes, self.order
        else:
            keep = relevant_nodes(net, set(evidence) | {query})
            nodes = [node for node in net.nodes if node.id in keep]
            pruned = BayesNet.from_nodes(nodes, evidence)
            order = elimination_order(pruned, [query], evidence)

        logger.debug("eliminating %s for query %s", order, query)
        factors = [node.cpt.reduce(evidence) for node in nodes]
        result = eliminate(factors, order)
        if result.scope != (query,):
            raise InferenceError(f"elimination left scope {result.scope}, expected ({query},)")
        return float(result.values[0]), float(result.values[1])
