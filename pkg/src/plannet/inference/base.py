"""Base interface for inference engines."""

import logging
from typing import Dict, Iterable, Optional

from ..errors import InconsistentEvidenceError, InferenceError
from ..network import BayesNet


logger = logging.getLogger(__name__)

# below this the evidence is treated as impossible
MIN_NORMALIZER = 1e-300


class InferenceEngine:
    """Exact posterior computation over a BayesNet.

    All engines should inherit from this and implement ``query_weights``.
    Evidence defaults to the network's own evidence map; pass an explicit
    dict to replace it.
    """

    def query_weights(self, net: BayesNet, evidence: Dict[int, bool], query: int):
        """Unnormalized (P(query=false, evidence), P(query=true, evidence)).

        ``evidence`` never contains ``query``.
        """
        raise NotImplementedError("query_weights() must be implemented by engine")

    @staticmethod
    def _evidence(net: BayesNet, evidence: Optional[Dict[int, bool]]) -> Dict[int, bool]:
        evidence = net.evidence if evidence is None else evidence
        known = {node.id for node in net.nodes}
        unknown = sorted(set(evidence) - known)
        if unknown:
            raise InferenceError(f"evidence on unknown nodes {unknown}")
        return {int(k): bool(v) for k, v in evidence.items()}

    def posterior(self, net: BayesNet, evidence: Optional[Dict[int, bool]], query: int) -> float:
        """P(query=true | evidence).

        Raises:
            InferenceError: if query is not a node of net.
            InconsistentEvidenceError: if the evidence has zero probability.
        """
        evidence = self._evidence(net, evidence)
        if query not in {node.id for node in net.nodes}:
            raise InferenceError(f"unknown query node {query}")

        rest = {k: v for k, v in evidence.items() if k != query}
        return self._conclude(evidence, query, self.query_weights(net, rest, query))

    @staticmethod
    def _conclude(evidence: Dict[int, bool], query: int, weights) -> float:
        p_false, p_true = weights
        normalizer = p_false + p_true
        if query in evidence:
            normalizer = p_true if evidence[query] else p_false
        if not normalizer > MIN_NORMALIZER:
            raise InconsistentEvidenceError(
                f"evidence has probability {normalizer:g}; cannot condition on it"
            )
        if query in evidence:
            return 1.0 if evidence[query] else 0.0
        logger.debug("query %s: normalizer %g", query, normalizer)
        return min(1.0, max(0.0, p_true / normalizer))

    def marginals(
        self, net: BayesNet, evidence: Optional[Dict[int, bool]], queries: Iterable[int]
    ) -> Dict[int, float]:
        """posterior() for each query id."""
        return {int(q): self.posterior(net, evidence, q) for q in queries}
