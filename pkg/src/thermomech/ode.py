from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class ReducedODE:
    """Explicit first-order system ``state' = rhs(t, state)``.

    ``guards`` are ``(name, predicate)`` pairs that must hold on every
    sample; ``velocity_indices`` mark the components that flip sign under
    time reversal.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    state_names: tuple[str, ...]
    guards: tuple[tuple[str, Callable[[np.ndarray], bool]], ...] = ()
    velocity_indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.state_names) != self.dimension:
            raise ValueError("state_names must have one entry per state component")

    def __call__(self, t: float, state) -> np.ndarray:
        return np.asarray(self.rhs(t, np.asarray(state, dtype=float)), dtype=float)

    def failed_guard(self, state: Sequence[float]) -> str | None:
        state = np.asarray(state, dtype=float)
        if not np.all(np.isfinite(state)):
            return "finite"
        for name, predicate in self.guards:
            if not predicate(state):
                return name
        return None
