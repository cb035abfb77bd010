"""3-CNF formulas: DIMACS parsing, evaluation, a small DPLL solver and a
seeded random generator.

Literals use the DIMACS convention: variable ``v`` (1-based) is ``v`` and its
negation is ``-v``.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from dppmle.errors import ParseError, ValidationError


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValidationError("formula needs at least one variable")
        cl = tuple(tuple(int(x) for x in c) for c in self.clauses)
        for j, c in enumerate(cl):
            _check_clause(c, j + 1, self.n_vars)
        object.__setattr__(self, "clauses", cl)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> Counter:
        """Number of clauses each variable (1-based) appears in."""
        return Counter(abs(x) for c in self.clauses for x in c)

    @property
    def k(self) -> int:
        """Maximum variable occurrence count, at least 1."""
        occ = self.occurrences()
        return max(max(occ.values(), default=1), 1)

    def literal_occurrences(self) -> Counter:
        return Counter(x for c in self.clauses for x in c)

    def satisfied(self, assignment: Sequence[bool]) -> list[bool]:
        if len(assignment) != self.n_vars:
            raise ValidationError(
                f"assignment has {len(assignment)} values for {self.n_vars} variables")
        return [any(assignment[abs(x) - 1] == (x > 0) for x in c) for c in self.clauses]

    def satisfied_fraction(self, assignment: Sequence[bool]) -> float:
        sat = self.satisfied(assignment)
        return sum(sat) / len(sat) if sat else 1.0

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {self.m}"]
        lines += [" ".join(str(x) for x in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def _check_clause(c, idx: int, n_vars: Optional[int]) -> None:
    if len(c) != 3:
        raise ValidationError(f"clause {idx}: expected 3 literals, got {len(c)}")
    if 0 in c:
        raise ValidationError(f"clause {idx}: literal 0 is not allowed")
    if len({abs(x) for x in c}) != 3:
        raise ValidationError(f"clause {idx}: repeated variable")
    if n_vars is not None:
        for x in c:
            if abs(x) > n_vars:
                raise ValidationError(
                    f"clause {idx}: variable {abs(x)} exceeds declared count {n_vars}")


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF restricted to 3-literal clauses.

    The ``p cnf`` header is optional; without it the variable count is the
    largest index seen.  Clauses may span lines and end at ``0``.

    Raises
    ------
    ParseError
        Bad header, non-integer token, or clause count differing from the header.
    ValidationError
        Clause of the wrong size or with a repeated variable (1-based clause index).
    """
    header = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("%"):
            break
        if s.startswith("p"):
            parts = s.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad problem line, expected 'p cnf <vars> <clauses>'", lineno, 1)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError("non-integer in problem line", lineno, 1) from None
            continue
        col = 1
        for tok in s.split():
            pos = line.find(tok, col - 1) + 1
            col = pos + len(tok)
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"clause {len(clauses) + 1}: bad literal {tok!r}",
                                 lineno, pos) from None
            if lit == 0:
                _check_clause(tuple(cur), len(clauses) + 1,
                              header[0] if header else None)
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        raise ParseError(f"clause {len(clauses) + 1}: missing terminating 0")
    if header is not None:
        n_vars, m = header
        if m != len(clauses):
            raise ParseError(f"header declares {m} clauses but {len(clauses)} were read")
    else:
        n_vars = max((abs(x) for c in clauses for x in c), default=0)
    if not clauses:
        raise ParseError("formula has no clauses")
    return CnfFormula(n_vars, tuple(clauses))


def solve(phi: CnfFormula) -> Optional[list[bool]]:
    """Return a satisfying assignment or ``None`` (DPLL with unit propagation)."""
    clauses = [list(c) for c in phi.clauses]

    def dpll(assign: dict) -> Optional[dict]:
        assign = dict(assign)
        while True:
            unit = None
            for c in clauses:
                vals = [assign.get(abs(x)) for x in c]
                if any(v is not None and v == (x > 0) for v, x in zip(vals, c)):
                    continue
                free = [x for v, x in zip(vals, c) if v is None]
                if not free:
                    return None
                if len(free) == 1:
                    unit = free[0]
                    break
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
        for v in range(1, phi.n_vars + 1):
            if v not in assign:
                for val in (True, False):
                    res = dpll({**assign, v: val})
                    if res is not None:
                        return res
                return None
        return assign

    res = dpll({})
    if res is None:
        return None
    return [bool(res[v]) for v in range(1, phi.n_vars + 1)]


def random_formula(n_vars: int, m: int, rng: random.Random,
                   max_occurrences: Optional[int] = None,
                   max_tries: int = 1000) -> CnfFormula:
    """Uniform random 3-CNF with distinct variables per clause.

    With ``max_occurrences`` set, each variable appears in at most that many
    clauses (variables are drawn from those with spare capacity).
    """
    if n_vars < 3:
        raise ValidationError("random 3-CNF needs at least 3 variables")
    for _ in range(max_tries):
        left = {v: (max_occurrences or m) for v in range(1, n_vars + 1)}
        clauses = []
        ok = True
        for _ in range(m):
            pool = sorted(v for v, c in left.items() if c > 0)
            if len(pool) < 3:
                ok = False
                break
            vs = rng.sample(pool, 3)
            for v in vs:
                left[v] -= 1
            clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
        if ok:
            return CnfFormula(n_vars, tuple(clauses))
    raise ValidationError("could not place clauses under the occurrence cap")
