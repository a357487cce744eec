"""Full joint enumeration: the ground-truth oracle for small networks."""

import logging
from typing import Dict, Iterable, Optional

import numpy as np

from ..errors import InferenceError, NetworkTooLargeError
from ..network import BayesNet
from .base import InferenceEngine


logger = logging.getLogger(__name__)

MAX_NODES = 25


class Enumeration(InferenceEngine):
    """Sums the full joint distribution; networks of at most 25 nodes.

    Example:
        oracle = Enumeration()
        p = oracle.posterior(net, net.evidence, net.find("(hang k1)").id)
    """

    def __init__(self, max_nodes: int = MAX_NODES):
        self.max_nodes = max_nodes

    def joint(self, net: BayesNet) -> np.ndarray:
        """The joint table, one axis per node in id order."""
        n = len(net.nodes)
        if n > self.max_nodes:
            raise NetworkTooLargeError(
                f"network has {n} nodes; enumeration is capped at {self.max_nodes}"
            )
        logger.debug("building joint table over %s nodes", n)
        position = {node.id: i for i, node in enumerate(net.nodes)}
        joint = np.ones((2,) * n, dtype=np.float64)
        for node in net.nodes:
            ordered = sorted(node.cpt.scope, key=position.get)
            shape = [1] * n
            for v in ordered:
                shape[position[v]] = 2
            joint *= node.cpt.transpose(ordered).values.reshape(shape)
        return joint

    def _weights(self, net, joint, evidence, query):
        position = {node.id: i for i, node in enumerate(net.nodes)}
        index = [slice(None)] * len(net.nodes)
        for node_id, value in evidence.items():
            index[position[node_id]] = int(value)
        # keep the query axis: move it first, then sum everything else
        sliced = np.moveaxis(joint, position[query], 0)
        index.insert(0, index.pop(position[query]))
        weights = sliced[tuple(index)].reshape(2, -1).sum(axis=1)
        return float(weights[0]), float(weights[1])

    def query_weights(self, net: BayesNet, evidence: Dict[int, bool], query: int):
        return self._weights(net, self.joint(net), evidence, query)

    def marginals(
        self, net: BayesNet, evidence: Optional[Dict[int, bool]], queries: Iterable[int]
    ) -> Dict[int, float]:
        """Posteriors for many queries from a single joint table."""
        evidence = self._evidence(net, evidence)
        queries = [int(q) for q in queries]
        if not queries:
            return {}
        known = {node.id for node in net.nodes}
        missing = [q for q in queries if q not in known]
        if missing:
            raise InferenceError(f"unknown query nodes {missing}")
        joint = self.joint(net)
        result = {}
        for query in queries:
            rest = {k: v for k, v in evidence.items() if k != query}
            result[query] = self._conclude(evidence, query, self._weights(net, joint, rest, query))
        return result
