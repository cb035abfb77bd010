"""Training-set data model, the dataset file format and empirical statistics.

Files use 1-indexed elements (``{"ground_set_size": n, "samples": [[...]]}``
with strictly increasing inner lists); :class:`Dataset` stores 0-indexed
sorted tuples.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from dppmle.errors import ParseError, StructuralInputError, ValidationError


@dataclass(frozen=True)
class Dataset:
    """Ground-set size plus an ordered multiset of subsets.

    Attributes
    ----------
    n : int
        Ground-set size.
    samples : tuple of tuple of int
        0-indexed, each sorted ascending with no repeats.  Order and
        duplicates are preserved.
    """

    n: int
    samples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"ground-set size must be a positive integer, got {self.n!r}")
        samples = tuple(tuple(int(i) for i in s) for s in self.samples)
        if not samples:
            raise ValidationError("dataset needs at least one sample (m >= 1)")
        for t, s in enumerate(samples):
            for i in s:
                if not 0 <= i < self.n:
                    raise ValidationError(
                        f"sample {t + 1}: element {i + 1} out of range [1, {self.n}]")
            if any(a >= b for a, b in zip(s, s[1:])):
                raise ValidationError(f"sample {t + 1}: elements must be strictly increasing")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_subsets(cls, n: int, subsets: Iterable[Iterable[int]]) -> "Dataset":
        """Build from 0-indexed subsets in any order (they get sorted)."""
        out = []
        for t, s in enumerate(subsets):
            s = list(s)
            if len(set(s)) != len(s):
                raise ValidationError(f"sample {t + 1}: repeated element")
            out.append(tuple(sorted(s)))
        return cls(n, tuple(out))

    @classmethod
    def from_one_indexed(cls, n: int, subsets: Iterable[Iterable[int]]) -> "Dataset":
        return cls.from_subsets(n, ([i - 1 for i in s] for s in subsets))

    @property
    def m(self) -> int:
        return len(self.samples)

    @property
    def has_empty(self) -> bool:
        """True when the empty set is among the samples."""
        return any(len(s) == 0 for s in self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class EmpiricalStats:
    """Exact counts derived from a dataset.

    ``distribution`` maps each distinct sample to its multiplicity over ``m``
    as a :class:`fractions.Fraction`, so it sums to exactly 1.
    """

    n: int
    m: int
    frequencies: tuple[int, ...]
    a_max: int
    distribution: dict
    full_frequency: tuple[int, ...]

    def frequency_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(a, self.m) for a in self.frequencies)


def empirical_stats(D: Dataset) -> EmpiricalStats:
    counts = [0] * D.n
    for s in D.samples:
        for i in s:
            counts[i] += 1
    mult = Counter(D.samples)
    dist = {X: Fraction(c, D.m) for X, c in mult.items()}
    full = tuple(i for i, a in enumerate(counts) if a == D.m)
    return EmpiricalStats(n=D.n, m=D.m, frequencies=tuple(counts),
                          a_max=max(counts), distribution=dist, full_frequency=full)


def _parse_error(exc: json.JSONDecodeError) -> ParseError:
    return ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno)


def parse_dataset(text: str) -> Dataset:
    """Parse the dataset JSON format.

    Raises
    ------
    ParseError
        Malformed JSON (line/column attached) or wrong top-level shape.
    ValidationError
        Out-of-range or unsorted elements, with the 1-based sample number.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _parse_error(exc) from None
    return dataset_from_json(obj)


def dataset_from_json(obj) -> Dataset:
    if not isinstance(obj, dict) or "ground_set_size" not in obj or "samples" not in obj:
        raise ParseError("dataset must be an object with 'ground_set_size' and 'samples'")
    n = obj["ground_set_size"]
    samples = obj["samples"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParseError("'ground_set_size' must be an integer")
    if not isinstance(samples, list):
        raise ParseError("'samples' must be a list of lists")
    out = []
    for t, s in enumerate(samples):
        if not isinstance(s, list) or any(isinstance(i, bool) or not isinstance(i, int) for i in s):
            raise ParseError(f"sample {t + 1} must be a list of integers")
        for i in s:
            if not 1 <= i <= n:
                raise ValidationError(f"sample {t + 1}: element {i} out of range [1, {n}]")
        if len(set(s)) != len(s):
            raise ValidationError(f"sample {t + 1}: repeated element")
        out.append(tuple(sorted(i - 1 for i in s)))
    return Dataset(n, tuple(out))


def dataset_to_json(D: Dataset) -> dict:
    return {"ground_set_size": D.n, "samples": [[i + 1 for i in s] for s in D.samples]}


def serialize_dataset(D: Dataset) -> str:
    """Canonical text: ``json.dumps`` with default separators plus newline."""
    return json.dumps(dataset_to_json(D)) + "\n"


def random_dataset(n: int, m: int, rng, p: float = 0.4) -> Dataset:
    """Samples with each element included independently with probability ``p``."""
    subsets = [tuple(i for i in range(n) if rng.random() < p) for _ in range(m)]
    return Dataset(n, tuple(subsets))


def check_samples(n: int, samples: Sequence[Sequence[int]]) -> None:
    for t, s in enumerate(samples):
        for i in s:
            if not 0 <= i < n:
                raise StructuralInputError(f"sample {t}: element {i} out of range [0, {n})")
