"""Counter-based random streams keyed by (replication, purpose, sensor, component, index).

Each draw is addressed by its key, so architectures that consume draws in a
different order (or not at all) still see identical primitives.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

# Environment purposes ignore the attempt counter: rejection sampling
# resamples noise and backoff but never the path.
PURPOSES = {
    "env_change": 0,
    "env_step": 1,
    "env_sign": 2,
    "env_pick": 3,
    "noise": 4,
    "backoff": 5,
    "setup_pick": 6,
}
ENVIRONMENT_PURPOSES = frozenset({"env_change", "env_step", "env_sign", "env_pick", "setup_pick"})
BLOCK_SIZE = 64

Key = Tuple[str, int, int, int]


@dataclass
class KeyedStreams:
    root_seed: int
    replication: int = 0
    attempt: int = 0
    overrides: Dict[Key, float] = field(default_factory=dict)
    _blocks: Dict[tuple, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def _seed_sequence(
        self, purpose: str, sensor: int, component: int, tag: int, counter: int
    ) -> np.random.SeedSequence:
        attempt = 0 if purpose in ENVIRONMENT_PURPOSES else self.attempt + 1
        spawn_key = (self.replication, attempt, PURPOSES[purpose], sensor, component, tag, counter)
        return np.random.SeedSequence(entropy=self.root_seed, spawn_key=spawn_key)

    def generator(self, purpose: str, sensor: int, component: int, index: int) -> np.random.Generator:
        """A Philox generator dedicated to one key."""
        seq = self._seed_sequence(purpose, sensor, component, 1, index)
        return np.random.Generator(np.random.Philox(seq))

    def _block(self, kind: str, purpose: str, sensor: int, component: int, index: int) -> float:
        block, offset = divmod(index, BLOCK_SIZE)
        cache_key = (kind, purpose, sensor, component, block)
        values = self._blocks.get(cache_key)
        if values is None:
            rng = np.random.Generator(np.random.Philox(self._seed_sequence(purpose, sensor, component, 0, block)))
            values = rng.standard_normal(BLOCK_SIZE) if kind == "normal" else rng.random(BLOCK_SIZE)
            self._blocks[cache_key] = values
        return float(values[offset])

    def uniform(self, purpose: str, sensor: int, component: int, index: int) -> float:
        return self._block("uniform", purpose, sensor, component, index)

    def normal(self, purpose: str, sensor: int, component: int, index: int) -> float:
        return self._block("normal", purpose, sensor, component, index)

    def pinned(self, purpose: str, sensor: int, component: int, index: int) -> Optional[float]:
        """Forced value for a key, if a conditioned scenario pins it."""
        return self.overrides.get((purpose, sensor, component, index))

    def with_attempt(self, attempt: int) -> "KeyedStreams":
        return replace(self, attempt=attempt, overrides=dict(self.overrides), _blocks={})

    def with_overrides(self, extra: Dict[Key, float]) -> "KeyedStreams":
        merged = dict(self.overrides)
        merged.update(extra)
        return replace(self, overrides=merged, _blocks={})

    def digest(self) -> str:
        """Checksum of everything that determines the primitives served."""
        material = {
            "root_seed": self.root_seed,
            "replication": self.replication,
            "attempt": self.attempt,
            "overrides": sorted([list(k) + [v] for k, v in self.overrides.items()]),
        }
        return hashlib.sha256(json.dumps(material, sort_keys=True).encode()).hexdigest()
