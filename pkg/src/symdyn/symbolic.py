"""One-sided subshifts of finite type.

Symbols are the integers ``1..N`` throughout the public interface.  Infinite
sequences are never stored; they are represented by deterministic
:class:`SymbolGenerator` objects that produce the symbol at any index on
demand, and every metric or statistic takes an explicit depth or horizon.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from symdyn.errors import (
    EmptyWord,
    NonConvergence,
    NotAdmissible,
    NotBinary,
    NotChaoticMatrix,
    SymbolOutOfRange,
    TooSmall,
    ZeroColumn,
    ZeroRow,
)

Word = tuple[int, ...]

POWER_ITERATION_CAP = 100_000


@dataclass(frozen=True)
class TransitionMatrix:
    """A validated N x N 0/1 matrix with no zero row or column.

    Build instances through :func:`validate_matrix`; the constructor itself
    runs the same checks.
    """

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for row in self.entries:
            for v in row:
                if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, float, np.integer, np.floating)) or v != int(v):
                    raise NotBinary(f"entry {v!r} is not 0 or 1")
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n < 2:
            raise TooSmall(f"transition matrix needs N >= 2, got N={n}")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise NotBinary(f"row {i + 1} has {len(row)} entries, expected {n}")
            for j, v in enumerate(row):
                if v not in (0, 1):
                    raise NotBinary(f"entry ({i + 1},{j + 1}) = {v} is not 0 or 1")
        for i, row in enumerate(rows):
            if sum(row) == 0:
                raise ZeroRow(f"row {i + 1} sums to 0")
        for j in range(n):
            if sum(rows[i][j] for i in range(n)) == 0:
                raise ZeroColumn(f"column {j + 1} sums to 0")

    @property
    def n_symbols(self) -> int:
        return len(self.entries)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def allowed(self, i: int, j: int) -> bool:
        """True when symbol ``j`` may follow symbol ``i``."""
        return self.entries[i - 1][j - 1] == 1

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j + 1 for j, v in enumerate(self.entries[i - 1]) if v)

    def check_symbol(self, i: int) -> None:
        if not 1 <= i <= self.n_symbols:
            raise SymbolOutOfRange(f"symbol {i} outside 1..{self.n_symbols}")

    def to_list(self) -> list[list[int]]:
        return [list(row) for row in self.entries]


def validate_matrix(entries: Sequence[Sequence[int]] | np.ndarray) -> TransitionMatrix:
    return TransitionMatrix(tuple(tuple(row) for row in entries))


def full_matrix(n: int) -> TransitionMatrix:
    return validate_matrix([[1] * n for _ in range(n)])


# --------------------------------------------------------------------------
# words and generators


def is_admissible(matrix: TransitionMatrix, word: Iterable[int]) -> bool:
    word = tuple(word)
    for s in word:
        if not 1 <= s <= matrix.n_symbols:
            return False
    return all(matrix.allowed(a, b) for a, b in zip(word, word[1:]))


def check_admissible(matrix: TransitionMatrix, word: Iterable[int]) -> Word:
    word = tuple(word)
    for s in word:
        matrix.check_symbol(s)
    for k, (a, b) in enumerate(zip(word, word[1:])):
        if not matrix.allowed(a, b):
            raise NotAdmissible(f"transition {a}->{b} at position {k} is forbidden")
    return word


class SymbolGenerator:
    """A deterministic one-sided symbol sequence, evaluated lazily."""

    def symbol(self, i: int) -> int:
        raise NotImplementedError

    def prefix(self, n: int) -> Word:
        return tuple(self.symbol(i) for i in range(n))

    def shifted(self, k: int = 1) -> SymbolGenerator:
        if k == 0:
            return self
        return ShiftedGenerator(self, k)

    def __getitem__(self, i: int) -> int:
        return self.symbol(i)


@dataclass(frozen=True)
class PeriodicGenerator(SymbolGenerator):
    word: Word

    def __post_init__(self) -> None:
        if not self.word:
            raise EmptyWord("periodic generator needs a nonempty word")
        object.__setattr__(self, "word", tuple(self.word))

    def symbol(self, i: int) -> int:
        return self.word[i % len(self.word)]

    def shifted(self, k: int = 1) -> SymbolGenerator:
        k %= len(self.word)
        return PeriodicGenerator(self.word[k:] + self.word[:k])


@dataclass(frozen=True)
class ExplicitGenerator(SymbolGenerator):
    """A finite explicit head followed by an optional generator tail."""

    head: Word
    tail: SymbolGenerator | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", tuple(self.head))

    def symbol(self, i: int) -> int:
        if i < len(self.head):
            return self.head[i]
        if self.tail is None:
            raise IndexError(f"explicit sequence has only {len(self.head)} symbols")
        return self.tail.symbol(i - len(self.head))

    def shifted(self, k: int = 1) -> SymbolGenerator:
        if k <= len(self.head):
            return ExplicitGenerator(self.head[k:], self.tail)
        if self.tail is None:
            raise IndexError("shift past the end of a finite sequence")
        return self.tail.shifted(k - len(self.head))


@dataclass(frozen=True)
class ShiftedGenerator(SymbolGenerator):
    base: SymbolGenerator
    offset: int

    def symbol(self, i: int) -> int:
        return self.base.symbol(i + self.offset)

    def shifted(self, k: int = 1) -> SymbolGenerator:
        return self.base.shifted(self.offset + k)


class RandomAdmissibleGenerator(SymbolGenerator):
    """Uniform random walk on the transition graph with a fixed seed.

    Symbols are drawn sequentially and memoised, so the value at an index
    never depends on the order in which indices are requested.
    """

    def __init__(self, matrix: TransitionMatrix, seed: int, first: int | None = None):
        self.matrix = matrix
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        if first is None:
            first = int(self._rng.integers(1, matrix.n_symbols + 1))
        matrix.check_symbol(first)
        self._symbols = [first]

    def symbol(self, i: int) -> int:
        while len(self._symbols) <= i:
            succ = self.matrix.successors(self._symbols[-1])
            self._symbols.append(succ[int(self._rng.integers(len(succ)))])
        return self._symbols[i]

    def __repr__(self) -> str:
        return f"RandomAdmissibleGenerator(seed={self.seed})"


def shift(word: Word | SymbolGenerator) -> Word | SymbolGenerator:
    """Drop the first symbol of a finite word or an infinite generator."""
    if isinstance(word, SymbolGenerator):
        return word.shifted(1)
    if len(word) == 0:
        raise EmptyWord("cannot shift an empty word")
    return tuple(word[1:])


# --------------------------------------------------------------------------
# metric and cylinders


def sequence_metric(alpha: SymbolGenerator | Word, beta: SymbolGenerator | Word, depth: int) -> float:
    """Truncated metric sum_{i<depth} [a_i != b_i] / 2**i.

    The neglected tail is at most ``2**(1 - depth)``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    a = alpha.prefix(depth) if isinstance(alpha, SymbolGenerator) else tuple(alpha[:depth])
    b = beta.prefix(depth) if isinstance(beta, SymbolGenerator) else tuple(beta[:depth])
    if len(a) < depth or len(b) < depth:
        raise ValueError("finite words shorter than the requested depth")
    return sum(math.ldexp(1.0, -i) for i in range(depth) if a[i] != b[i])


def cylinder(matrix: TransitionMatrix, i: int) -> Callable[[SymbolGenerator | Word], bool]:
    """Membership test for the cylinder of sequences starting with ``i``."""
    matrix.check_symbol(i)

    def member(alpha: SymbolGenerator | Word) -> bool:
        return alpha[0] == i

    return member


# --------------------------------------------------------------------------
# counting and spectral radius


def _int_matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def matrix_power_exact(matrix: TransitionMatrix, k: int) -> list[list[int]]:
    n = matrix.n_symbols
    result = [[int(i == j) for j in range(n)] for i in range(n)]
    base = matrix.to_list()
    while k:
        if k & 1:
            result = _int_matmul(result, base)
        base = _int_matmul(base, base)
        k >>= 1
    return result


def count_words(matrix: TransitionMatrix, length: int) -> int:
    """Exact number of admissible words of the given length."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return sum(map(sum, matrix_power_exact(matrix, length - 1)))


def _strong_components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    reach = adj.astype(bool) | np.eye(n, dtype=bool)
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    seen: set[int] = set()
    comps = []
    for i in range(n):
        if i in seen:
            continue
        comp = [j for j in range(n) if reach[i, j] and reach[j, i]]
        seen.update(comp)
        comps.append(comp)
    return comps


def _perron_root_irreducible(block: np.ndarray, tol: float) -> float:
    # Shifting by the identity makes an irreducible block primitive, so the
    # iteration cannot oscillate on periodic graphs.  The stopping rule uses
    # the Collatz-Wielandt bracket min (Bv)_i/v_i <= rho(B) <= max (Bv)_i/v_i,
    # which holds for any positive v.
    n = block.shape[0]
    shifted = block.astype(float) + np.eye(n)
    v = np.ones(n)
    for _ in range(POWER_ITERATION_CAP):
        w = shifted @ v
        ratios = w / v
        lo, hi = ratios.min(), ratios.max()
        if hi - lo < tol * hi:
            return float(0.5 * (lo + hi) - 1.0)
        v = w / w.max()
    raise NonConvergence(f"power iteration did not converge to tol={tol}")


def spectral_radius(matrix: TransitionMatrix, tol: float = 1e-12) -> float:
    """Perron root of a transition matrix by power iteration.

    The graph is split into strongly connected components first; the root of
    the whole matrix is the largest root over the diagonal blocks.  Each block
    is iterated as ``B + I`` from the all-ones vector, which converges
    geometrically for irreducible ``B``.  A component that is a single symbol
    without a self-loop contributes 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = matrix.array
    best = 0.0
    for comp in _strong_components(a):
        block = a[np.ix_(comp, comp)]
        if len(comp) == 1:
            best = max(best, float(block[0, 0]))
            continue
        best = max(best, _perron_root_irreducible(block, tol))
    return best


def topological_entropy(matrix: TransitionMatrix, tol: float = 1e-12) -> float:
    return math.log(spectral_radius(matrix, tol))


def is_irreducible(matrix: TransitionMatrix) -> bool:
    a = matrix.array.astype(bool)
    n = matrix.n_symbols
    reach = a.copy()
    power = a.copy()
    for _ in range(n - 1):
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
        reach |= power
    return bool(reach.all())


def row_sum_at_least_two(matrix: TransitionMatrix) -> bool:
    return any(sum(row) >= 2 for row in matrix.entries)


# --------------------------------------------------------------------------
# scrambled pairs


def _shortest_path(matrix: TransitionMatrix, start: int, goal: int) -> Word:
    """Shortest path start -> goal of length >= 1, excluding ``start``.

    Successors are explored in increasing order, so ties go to the smallest
    symbol sequence.
    """
    parent: dict[int, int | None] = {}
    queue: deque[int] = deque()
    for s in matrix.successors(start):
        parent[s] = None
        queue.append(s)
    while queue and goal not in parent:
        u = queue.popleft()
        for s in matrix.successors(u):
            if s not in parent:
                parent[s] = u
                queue.append(s)
    if goal not in parent:
        raise NotChaoticMatrix(f"symbol {goal} is not reachable from {start}")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


@lru_cache(maxsize=256)
def _far_plan(matrix: TransitionMatrix, far_cycle: Word, hub: int, length: int) -> tuple[int, Word] | None:
    # Longest stay t in the far cycle such that the connector back to the hub
    # still arrives by the end of the block.
    for t in range(length - 1, -1, -1):
        back = _shortest_path(matrix, far_cycle[t % len(far_cycle)], hub)
        if t + len(back) <= length:
            return t, back
    return None


def block_boundaries(limit: int) -> list[int]:
    """Block boundaries ``floor(2**(k(k-1)/2 + 21k/4))`` up to ``limit``.

    Consecutive ratios are ``2**(k + 21/4)`` and grow without bound, so
    agreement blocks eventually dominate every running average and so do
    disagreement blocks.  The offset puts a boundary at 2896, inside the
    tail half of a 4096-step horizon.
    """
    out = []
    k = 0
    while True:
        b = math.floor(2.0 ** (k * (k - 1) / 2 + 21 * k / 4))
        out.append(b)
        if b > limit:
            return out
        k += 1


def block_index(i: int) -> int:
    """Index of the block containing position ``i``; block 0 is [0, 1)."""
    k = 0
    while True:
        if i < math.floor(2.0 ** (k * (k - 1) / 2 + 21 * k / 4)):
            return k
        k += 1


def _block_start(k: int) -> int:
    if k == 0:
        return 0
    return math.floor(2.0 ** ((k - 1) * (k - 2) / 2 + 21 * (k - 1) / 4))


def _block_end(k: int) -> int:
    return math.floor(2.0 ** (k * (k - 1) / 2 + 21 * k / 4))


@dataclass(frozen=True)
class BlockInterleavedGenerator(SymbolGenerator):
    """Follows ``base`` on even blocks and an excursion on odd blocks.

    ``base`` is the periodic word ``cycle`` (which starts at the hub symbol);
    on an odd block the sequence leaves the hub through ``excursion`` (a cycle
    through the hub with a different second symbol) or, when ``cycle`` is the
    hub's self-loop, through ``far_cycle`` plus a connector ``return_path``.
    """

    cycle: Word
    excursion: Word
    far_cycle: Word = ()
    matrix: TransitionMatrix | None = field(default=None, compare=False)

    def _far_block(self, s: int, e: int, i: int) -> int:
        if self.matrix is None:
            raise ValueError("far excursions need the transition matrix")
        hub = self.cycle[0]
        plan = _far_plan(self.matrix, self.far_cycle, hub, e - s)
        if plan is None:
            return hub
        t, back = plan
        off = i - s
        if off <= t:
            return self.far_cycle[off % len(self.far_cycle)]
        off -= t + 1
        return back[off] if off < len(back) else hub

    def symbol(self, i: int) -> int:
        base = self.cycle[i % len(self.cycle)]
        k = block_index(i)
        if k % 2 == 0:
            return base
        s, e = _block_start(k), _block_end(k)
        if self.far_cycle:
            return self._far_block(s, e, i)
        period = math.lcm(len(self.cycle), len(self.excursion))
        s2 = -(-s // period) * period
        e2 = s2 + ((e - s2) // period) * period if e >= s2 else s2
        if s2 <= i < e2:
            return self.excursion[(i - s2) % len(self.excursion)]
        return base


def _shortest_cycle(matrix: TransitionMatrix, hub: int, first: int) -> Word:
    """Shortest cycle hub -> first -> ... -> hub, returned starting at hub."""
    if first == hub:
        return (hub,)
    back = _shortest_path(matrix, first, hub)
    return (hub, first) + back[:-1]


def scrambled_pair(matrix: TransitionMatrix) -> tuple[SymbolGenerator, SymbolGenerator]:
    """A Li-Yorke / distributionally scrambled pair of admissible sequences.

    Both sequences follow a shortest cycle through the hub symbol (the
    smallest symbol with two successors).  The second one departs on odd
    blocks of a super-exponential block schedule (:func:`block_boundaries`)
    and rejoins at block ends, so the pair agrees on arbitrarily long stretches
    and disagrees on arbitrarily long stretches.
    """
    if not (is_irreducible(matrix) and row_sum_at_least_two(matrix)):
        raise NotChaoticMatrix("needs an irreducible matrix with some row sum >= 2")
    hub = next(i for i in range(1, matrix.n_symbols + 1) if len(matrix.successors(i)) >= 2)
    succ = matrix.successors(hub)
    near = hub if hub in succ else succ[0]
    cycle = _shortest_cycle(matrix, hub, near)
    other = next(s for s in succ if s != near)
    alpha = PeriodicGenerator(cycle)
    if len(cycle) == 1:
        far_cycle = (other,) + _shortest_path(matrix, other, other)[:-1]
        beta = BlockInterleavedGenerator(cycle, (), far_cycle, matrix)
    else:
        beta = BlockInterleavedGenerator(cycle, _shortest_cycle(matrix, hub, other))
    return alpha, beta
