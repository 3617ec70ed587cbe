from dataclasses import dataclass, field

import numpy as np

from util.errors import EmptyDistributionError, ParameterError

BIT_GENERATOR = "PCG64"


class ProbDist:
    """Probabilities over hashable, mutually comparable outcome keys.

    Keys are OAM values, (pol, m) tuples or pairs of modes. A coincidence set
    taken after a beam splitter is flagged ``subnormalized`` since it only
    holds the split events.
    """

    def __init__(self, probabilities, subnormalized=False):
        self.support = sorted(probabilities)
        self.values = np.array([float(probabilities[k]) for k in self.support], dtype=float)
        self.subnormalized = subnormalized
        if np.any(self.values < -1e-15):
            raise ParameterError("probabilities must be non-negative")
        self.values = np.clip(self.values, 0.0, None)
        self._lookup = {k: i for i, k in enumerate(self.support)}
        if not subnormalized and self.support and abs(self.total - 1.0) > 1e-9:
            raise ParameterError(f"distribution sums to {self.total!r}, expected 1")

    @classmethod
    def from_array(cls, keys, values, subnormalized=False):
        return cls(dict(zip(keys, values)), subnormalized=subnormalized)

    @property
    def total(self):
        return float(self.values.sum())

    def __len__(self):
        return len(self.support)

    def __getitem__(self, key):
        return self.get(key)

    def get(self, key, default=0.0):
        index = self._lookup.get(key)
        return default if index is None else float(self.values[index])

    def items(self):
        return zip(self.support, (float(v) for v in self.values))

    def as_dict(self):
        return dict(self.items())

    def normalized(self):
        total = self.total
        if total <= 0:
            raise EmptyDistributionError("cannot normalize an empty distribution")
        return ProbDist.from_array(self.support, self.values / total)

    def __repr__(self):
        return f"ProbDist({len(self)} outcomes, total={self.total:.12g})"


@dataclass
class CountRecord:
    counts: dict
    shots: int
    seed: object = None
    bit_generator: str = BIT_GENERATOR
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(int(c) < 0 for c in self.counts.values()):
            raise ParameterError("counts must be non-negative integers")
        if sum(self.counts.values()) > self.shots:
            raise ParameterError("counts exceed the number of shots")

    @property
    def recorded(self):
        return int(sum(self.counts.values()))

    def frequencies(self):
        recorded = self.recorded
        if recorded == 0:
            raise EmptyDistributionError("no counts recorded")
        return ProbDist({k: c / recorded for k, c in self.counts.items()})


def _aligned(p, q):
    keys = sorted(set(p.support) | set(q.support))
    a = np.array([p.get(k) for k in keys])
    b = np.array([q.get(k) for k in keys])
    if not keys or a.sum() <= 0 or b.sum() <= 0:
        raise EmptyDistributionError("both distributions need positive weight")
    return a, b


def similarity(p, q):
    a, b = _aligned(p, q)
    s = np.sum(np.sqrt(a * b)) ** 2 / (a.sum() * b.sum())
    return float(min(s, 1.0))


def tvd(p, q):
    a, b = _aligned(p, q)
    return float(0.5 * np.sum(np.abs(a / a.sum() - b / b.sum())))


def _generator(seed):
    return np.random.Generator(np.random.PCG64(seed))


def sample_counts(p, shots, seed):
    if shots <= 0:
        raise ParameterError("shots must be positive")
    if p.total <= 0:
        raise EmptyDistributionError("cannot sample from an empty distribution")
    pvals = p.values / p.total
    drawn = _generator(seed).multinomial(int(shots), pvals)
    counts = {k: int(c) for k, c in zip(p.support, drawn)}
    return CountRecord(counts=counts, shots=int(shots), seed=seed)


def sample_batches(p, shots, seed, tasks):
    """Independent draws with per-task seeds spawned from one root seed"""
    children = np.random.SeedSequence(seed).spawn(tasks)
    records = []
    for index, child in enumerate(children):
        record = sample_counts(p, shots, child)
        record.seed = seed
        record.metadata["spawn_key"] = index
        records.append(record)
    return records


def poisson_sigma(record):
    return {k: float(np.sqrt(c)) for k, c in record.counts.items()}


def metrics_report(p, q, shots=None, seed=None):
    return {
        "similarity": similarity(p, q),
        "tvd": tvd(p, q),
        "shots": shots,
        "seed": seed,
        "bit_generator": BIT_GENERATOR,
    }
