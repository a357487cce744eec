"""Nonnegative tables over boolean variables, the unit of inference."""

from typing import Dict, Iterable, Sequence

import numpy as np


class Factor:
    """A table over boolean variables identified by integer node ids.

    ``values`` has shape ``(2,) * len(scope)``; axis i belongs to scope[i] and
    index 1 means true. Flattened row-major, the last scope variable varies
    fastest, so a CPT with scope ``parents + (child,)`` lays out one row per
    parent assignment.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Sequence[int], values):
        scope = tuple(int(v) for v in scope)
        values = np.asarray(values, dtype=np.float64)
        if len(set(scope)) != len(scope):
            raise ValueError(f"repeated variable in factor scope {scope}")
        if values.size != 2 ** len(scope):
            raise ValueError(
                f"factor over {len(scope)} variables needs {2 ** len(scope)} entries, got {values.size}"
            )
        values = values.reshape((2,) * len(scope))
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("factor entries must be finite and nonnegative")
        self.scope = scope
        self.values = values

    @classmethod
    def unit(cls) -> "Factor":
        return cls((), 1.0)

    @property
    def table(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __repr__(self):
        return f"Factor(scope={self.scope}, table={self.table.tolist()})"

    def __mul__(self, other: "Factor") -> "Factor":
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        axis = {v: i for i, v in enumerate(scope)}
        values = np.einsum(
            self.values,
            [axis[v] for v in self.scope],
            other.values,
            [axis[v] for v in other.scope],
            list(range(len(scope))),
        )
        return Factor(scope, values)

    def sum_out(self, variables: Iterable[int]) -> "Factor":
        drop = set(variables) & set(self.scope)
        if not drop:
            return self
        axes = tuple(i for i, v in enumerate(self.scope) if v in drop)
        scope = tuple(v for v in self.scope if v not in drop)
        return Factor(scope, self.values.sum(axis=axes))

    def reduce(self, evidence: Dict[int, bool]) -> "Factor":
        """Slice out observed variables."""
        if not any(v in evidence for v in self.scope):
            return self
        index = tuple(int(bool(evidence[v])) if v in evidence else slice(None) for v in self.scope)
        scope = tuple(v for v in self.scope if v not in evidence)
        return Factor(scope, self.values[index])

    def transpose(self, scope: Sequence[int]) -> "Factor":
        scope = tuple(scope)
        if set(scope) != set(self.scope) or len(scope) != len(self.scope):
            raise ValueError(f"{scope} is not a permutation of {self.scope}")
        return Factor(scope, np.transpose(self.values, [self.scope.index(v) for v in scope]))

    def total(self) -> float:
        return float(self.values.sum())

    def row_sums(self) -> np.ndarray:
        """Sums over the last scope variable, one per assignment of the rest."""
        return self.values.sum(axis=-1).reshape(-1)


def product(factors: Iterable[Factor]) -> Factor:
    result = Factor.unit()
    for factor in factors:
        result = result * factor
    return result

