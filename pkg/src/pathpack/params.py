"""Run parameters with the defaults of the reference experimental protocol."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import InputError


@dataclass(frozen=True)
class InstanceParams:
    """Solver settings.

    ``K`` bounds path length in nodes, ``beta`` is the idle-node cost, ``T``
    caps BP sweeps, ``bp_orders``/``greedy_orders`` are the number of random
    root orders tried per decode and by Greedy.
    """

    K: int = 5
    beta: float = 0.01
    T: int = 50
    bp_orders: int = 5
    greedy_orders: int = 200
    seed: int = 0
    time_limit: float | None = None

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise InputError("K must be an integer >= 2")
        if not self.beta > 0:
            raise InputError("beta must be positive")
        if int(self.T) != self.T or self.T < 1:
            raise InputError("T must be an integer >= 1")
        if self.bp_orders < 1 or self.greedy_orders < 1:
            raise InputError("order counts must be >= 1")
        if self.time_limit is not None and self.time_limit < 0:
            raise InputError("time_limit must be non-negative")

    def to_dict(self):
        return asdict(self)
