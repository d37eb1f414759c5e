"""Brute-force counting of constraint-avoiding subsets of F_p^n and a Monte Carlo estimator.

This module never looks at hyperplane lattices; it is the independent
ground truth those computations are checked against.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arrangement import BudgetExceeded
from .family import GeneratorSchema
from .linalg import InputError

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class DeckPoint:
    """A vector of F_p^n, encoded as the base-p integer with coords[0] least significant."""

    coords: tuple[int, ...]
    p: int

    @property
    def encoding(self) -> int:
        e = 0
        for c in reversed(self.coords):
            e = e * self.p + c
        return e

    @classmethod
    def decode(cls, e: int, p: int, n: int) -> "DeckPoint":
        if not 0 <= e < p**n:
            raise InputError(f"encoding {e} out of range for F_{p}^{n}")
        cs = []
        for _ in range(n):
            e, r = divmod(e, p)
            cs.append(r)
        return cls(tuple(cs), p)


def _prime_of(schema: GeneratorSchema) -> int:
    if schema.field.is_generic:
        raise InputError("point counting needs a prime field; schema is over the rationals")
    return schema.field.p


def _as_coords(points, p: int) -> list[tuple[int, ...]]:
    out = []
    for x in points:
        if isinstance(x, DeckPoint):
            out.append(tuple(c % p for c in x.coords))
        elif isinstance(x, int):
            out.append((x % p,))
        else:
            out.append(tuple(int(c) % p for c in x))
    return out


def is_avoiding(schema: GeneratorSchema, points: Sequence) -> bool:
    """No generator vanishes on any injective assignment of the points to its slots.

    Points may be :class:`DeckPoint`, coordinate tuples, or (for n = 1) ints.
    Repeated points make the answer False through the difference generator.
    """
    p = _prime_of(schema)
    pts = _as_coords(points, p)
    for g in schema.generators:
        cs = [int(c) for c in g.coeffs]
        for combo in itertools.permutations(range(len(pts)), g.arity):
            n = len(pts[combo[0]])
            if all(sum(c * pts[i][d] for c, i in zip(cs, combo)) % p == 0 for d in range(n)):
                return False
    return True


@dataclass(frozen=True)
class CountQuery:
    schema: GeneratorSchema
    n: int
    k: int
    ordered: bool = True
    budget: int = DEFAULT_BUDGET

    @property
    def q(self) -> int:
        return _prime_of(self.schema) ** self.n

    def check(self) -> None:
        if self.n < 0 or self.k < 0:
            raise InputError("n and k must be non-negative")
        if self.budget <= 0:
            raise InputError("budget must be positive")
        if self.q >= 2**62:
            raise InputError(f"deck size p^n = {self.q} does not fit a machine word")
        if self.q**self.k > self.budget:
            raise BudgetExceeded(f"p^(n*k) = {self.q}^{self.k} exceeds work budget {self.budget}")


@dataclass
class CountResult:
    query: CountQuery
    unordered: int
    elapsed: float
    steps: int = 0
    translation_reduced: bool = False

    @property
    def ordered(self) -> int:
        return self.unordered * math.factorial(self.query.k)

    @property
    def value(self) -> int:
        return self.ordered if self.query.ordered else self.unordered


class _Deck:
    """Vector arithmetic on encodings of F_p^n."""

    def __init__(self, p: int, n: int):
        self.p, self.n, self.q = p, n, p**n
        self.digits = np.zeros((self.q, n), dtype=np.int64)
        e = np.arange(self.q, dtype=np.int64)
        for d in range(n):
            self.digits[:, d] = e % p
            e //= p
        self.powers = np.array([p**d for d in range(n)], dtype=np.int64)

    def lincomb(self, coeffs: Sequence[int], pts: Sequence[np.ndarray]) -> np.ndarray:
        """Encodings of sum_i coeffs[i] * pts[i], elementwise over equal-shape arrays."""
        acc = 0
        for c, x in zip(coeffs, pts):
            acc = acc + c * self.digits[x]
        return (acc % self.p) @ self.powers


class _Completion:
    """Rules giving the points forbidden for the next element of an avoiding set.

    For a generator sum_i c_i x_i and a slot s left for the next point, the
    instance vanishes iff x_s = -c_s^{-1} sum_{i != s} c_i x_i.  When a point
    x joins the prefix P, the new forbidden points come from instances using
    x in some slot t and distinct points of P in the remaining slots.
    """

    def __init__(self, schema: GeneratorSchema, deck: _Deck):
        p = deck.p
        self.deck = deck
        self.rules = []  # (multiplier of x, multipliers of the other prefix points)
        self.initial: set[int] = set()
        for g in schema.generators:
            cs = [int(c) for c in g.coeffs]
            r = len(cs)
            for s in range(r):
                m = (-pow(cs[s], -1, p)) % p
                scaled = [(m * c) % p for c in cs]
                if r == 1:
                    self.initial.add(0)
                    continue
                for t in range(r):
                    if t == s:
                        continue
                    others = [scaled[u] for u in range(r) if u not in (s, t)]
                    self.rules.append((scaled[t], others))

    def forbidden_by(self, x: int, prefix: list[int]) -> np.ndarray:
        deck = self.deck
        out = []
        xa = np.array([x], dtype=np.int64)
        parr = np.array(prefix, dtype=np.int64)
        for ct, others in self.rules:
            if not others:
                out.append(deck.lincomb([ct], [xa]))
            elif len(others) == 1:
                if len(parr):
                    out.append(deck.lincomb([ct, others[0]], [np.full_like(parr, x), parr]))
            else:
                for combo in itertools.permutations(prefix, len(others)):
                    out.append(deck.lincomb([ct, *others], [xa, *[np.array([c]) for c in combo]]))
        out.append(xa)
        return np.concatenate(out)


class _Search:
    def __init__(self, schema: GeneratorSchema, n: int, k: int, budget: int):
        self.deck = _Deck(_prime_of(schema), n)
        self.rules = _Completion(schema, self.deck)
        self.k = k
        self.budget = budget
        self.steps = 0

    def start_state(self) -> np.ndarray:
        forb = np.zeros(self.deck.q, dtype=bool)
        for e in self.rules.initial:
            forb[e] = True
        return forb

    def push(self, forb: np.ndarray, x: int, prefix: list[int]) -> np.ndarray:
        child = forb.copy()
        child[self.rules.forbidden_by(x, prefix)] = True
        return child

    def count_from(self, prefix: list[int], forb: np.ndarray) -> int:
        """Increasing extensions of ``prefix`` to k points avoiding every instance."""
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"search exceeded {self.budget} steps")
        depth = len(prefix)
        if depth == self.k:
            return 1
        lo = prefix[-1] + 1 if prefix else 0
        cand = np.flatnonzero(~forb[lo:]) + lo
        if depth == self.k - 1:
            self.steps += len(cand)
            return len(cand)
        total = 0
        for x in cand.tolist():
            total += self.count_from(prefix + [x], self.push(forb, x, prefix))
        return total


def _count_roots(schema, n, k, budget, roots):
    s = _Search(schema, n, k, budget)
    forb = s.start_state()
    total = 0
    for x in roots:
        if not forb[x]:
            total += s.count_from([x], s.push(forb, x, []))
    return total, s.steps


def count_avoiders(query: CountQuery, threads: int = 1, use_translation: bool = True) -> CountResult:
    """Exact number of avoiding k-subsets of F_p^n by depth-first search.

    Sequences are strictly increasing by encoding, so the leaf count is the
    unordered count.  When every generator's coefficients sum to zero mod p,
    translations preserve avoidance and act freely on ordered tuples, so only
    sets containing 0 are enumerated and the total is q * N_0 / k.
    """
    query.check()
    t0 = time.perf_counter()
    schema, n, k = query.schema, query.n, query.k
    q = query.q
    if k == 0:
        return CountResult(query, 1, time.perf_counter() - t0)
    if k > q:
        return CountResult(query, 0, time.perf_counter() - t0)
    translate = use_translation and schema.coefficient_sums_vanish()
    if translate:
        total, steps = _count_roots(schema, n, k, query.budget, [0])
        num = q * total
        if num % k:
            raise ArithmeticError("translation orbit count not divisible by k")
        unordered = num // k
    else:
        roots = list(range(q))
        if threads > 1:
            shards = [roots[i::threads] for i in range(threads)]
            with ProcessPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(_count_roots, *zip(*[(schema, n, k, query.budget, sh) for sh in shards])))
            unordered = sum(t for t, _ in parts)
            steps = sum(s for _, s in parts)
            if steps > query.budget:
                raise BudgetExceeded(f"search exceeded {query.budget} steps")
        else:
            unordered, steps = _count_roots(schema, n, k, query.budget, roots)
    return CountResult(query, unordered, time.perf_counter() - t0, steps, translate)


def count_exhaustive(schema: GeneratorSchema, n: int, k: int) -> int:
    """Ordered count by checking every k-subset directly; tiny cases only."""
    p = _prime_of(schema)
    pts = [DeckPoint.decode(e, p, n).coords for e in range(p**n)]
    hits = sum(1 for c in itertools.combinations(pts, k) if is_avoiding(schema, c))
    return hits * math.factorial(k)


@dataclass
class Estimate:
    estimate: float
    stderr: float
    samples: int
    hits: int
    seed: int
    schema_name: str = ""
    n: int = 0
    k: int = 0


SHARD_SAMPLES = 1 << 14


def _shard_hits(schema: GeneratorSchema, n: int, k: int, count: int, seed_seq: np.random.SeedSequence) -> int:
    p = _prime_of(schema)
    q = p**n
    rng = np.random.Generator(np.random.Philox(seed_seq))
    deck = _Deck(p, n)
    batch = max(1, min(count, 4_000_000 // max(q, 1)))
    checks = []
    for g in schema.generators:
        cs = np.array([int(c) for c in g.coeffs], dtype=np.int64)
        for combo in itertools.permutations(range(k), g.arity):
            checks.append((cs, list(combo)))
    hits = 0
    done = 0
    while done < count:
        b = min(batch, count - done)
        perm = np.tile(np.arange(q, dtype=np.int64), (b, 1))
        rows = np.arange(b)
        for i in range(k):
            j = rng.integers(i, q, size=b)
            a, c = perm[rows, i].copy(), perm[rows, j].copy()
            perm[rows, i], perm[rows, j] = c, a
        chosen = deck.digits[perm[:, :k]]  # (b, k, n)
        bad = np.zeros(b, dtype=bool)
        for cs, combo in checks:
            s = np.tensordot(chosen[:, combo, :], cs, axes=([1], [0])) % p  # (b, n)
            bad |= np.all(s == 0, axis=1)
        hits += int((~bad).sum())
        done += b
    return hits


def estimate_probability(
    schema: GeneratorSchema, n: int, k: int, samples: int, seed: int = 0, threads: int = 1
) -> Estimate:
    """Fraction of uniformly random k-subsets of F_p^n that avoid the schema.

    Samples are split into fixed-size shards whose generators are spawned
    from ``seed``, so the result does not depend on ``threads``.
    """
    p = _prime_of(schema)
    if samples <= 0:
        raise InputError("samples must be positive")
    if k < 0 or k > p**n:
        raise InputError(f"k = {k} exceeds the deck size {p**n}")
    sizes = [SHARD_SAMPLES] * (samples // SHARD_SAMPLES)
    if samples % SHARD_SAMPLES:
        sizes.append(samples % SHARD_SAMPLES)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(schema, n, k, c, s) for c, s in zip(sizes, seqs)]
    if threads > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            hits = sum(ex.map(_shard_hits, *zip(*args)))
    else:
        hits = sum(_shard_hits(*a) for a in args)
    est = hits / samples
    err = math.sqrt(est * (1 - est) / samples)
    return Estimate(est, err, samples, hits, seed, schema.name, n, k)
