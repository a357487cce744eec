"""Exact inference engines and their module-level entry points."""

from typing import Dict, Iterable, Optional

from ..network import BayesNet
from .base import InferenceEngine
from .elimination import VariableElimination, elimination_order
from .enumeration import Enumeration


def posterior(net: BayesNet, evidence: Optional[Dict[int, bool]], query: int) -> float:
    """P(query=true | evidence) by variable elimination."""
    return VariableElimination().posterior(net, evidence, query)


def marginals(
    net: BayesNet, evidence: Optional[Dict[int, bool]], queries: Iterable[int]
) -> Dict[int, float]:
    return VariableElimination().marginals(net, evidence, queries)


def enumerate_posterior(net: BayesNet, evidence: Optional[Dict[int, bool]], query: int) -> float:
    """P(query=true | evidence) by summing the full joint (at most 25 nodes)."""
    return Enumeration().posterior(net, evidence, query)


def enumerate_marginals(
    net: BayesNet, evidence: Optional[Dict[int, bool]], queries: Iterable[int]
) -> Dict[int, float]:
    return Enumeration().marginals(net, evidence, queries)
