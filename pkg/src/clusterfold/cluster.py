"""Seed mutation with principal coefficients.

This module is the ground-truth oracle: cluster variables are carried as
explicit Laurent polynomials in the initial cluster, so every F-polynomial
and g-vector downstream can be checked against plain Fomin-Zelevinsky
mutation.  Exchange matrices are skew-symmetrizable (a positive integer
diagonal witness is found at validation time and carried along).
"""

from __future__ import annotations

from collections import Counter, deque
from fractions import Fraction
from math import gcd, lcm

from .poly import LaurentPoly


class NotSkewSymmetrizable(ValueError):
    pass


class DepthExceeded(RuntimeError):
    pass


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


class ExchangeMatrix:
    """A validated skew-symmetrizable integer matrix with its witness."""

    __slots__ = ("n", "entries", "skew_symmetrizer")

    def __init__(self, entries: list[list[int]], skew_symmetrizer: tuple[int, ...]):
        self.n = len(entries)
        self.entries = tuple(tuple(int(v) for v in row) for row in entries)
        self.skew_symmetrizer = tuple(skew_symmetrizer)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExchangeMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self) -> str:
        return f"ExchangeMatrix({[list(r) for r in self.entries]}, S={list(self.skew_symmetrizer)})"


def validate(entries) -> ExchangeMatrix:
    """Check skew-symmetrizability and return the matrix with a positive witness.

    The witness is the componentwise-smallest positive integer diagonal S with
    S*B skew-symmetric (normalized per connected component of the nonzero
    pattern).  Sign coherence (b_ij > 0 iff b_ji < 0) is part of the check.
    """
    n = len(entries)
    b = [[int(v) for v in row] for row in entries]
    for row in b:
        if len(row) != n:
            raise NotSkewSymmetrizable("matrix is not square")
    for i in range(n):
        if b[i][i] != 0:
            raise NotSkewSymmetrizable(f"nonzero diagonal entry at {i}")
        for j in range(i + 1, n):
            if (b[i][j] == 0) != (b[j][i] == 0):
                raise NotSkewSymmetrizable(f"zero pattern not symmetric at ({i},{j})")
            if b[i][j] != 0 and _sign(b[i][j]) == _sign(b[j][i]):
                raise NotSkewSymmetrizable(f"entries ({i},{j}) and ({j},{i}) have equal signs")

    # propagate s_j = s_i * b_ij / (-b_ji) over the nonzero pattern
    ratio: list[Fraction | None] = [None] * n
    for start in range(n):
        if ratio[start] is not None:
            continue
        component = [start]
        ratio[start] = Fraction(1)
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if b[i][j] == 0:
                    continue
                r = ratio[i] * Fraction(b[i][j], -b[j][i])
                if ratio[j] is None:
                    ratio[j] = r
                    component.append(j)
                    queue.append(j)
                elif ratio[j] != r:
                    raise NotSkewSymmetrizable(f"inconsistent symmetrizer ratio at ({i},{j})")
        denom = lcm(*(r.denominator for r in (ratio[i] for i in component)))
        values = [ratio[i] * denom for i in component]
        common = gcd(*(int(v) for v in values))
        for i, v in zip(component, values):
            ratio[i] = Fraction(int(v) // common)
    s = tuple(int(r) for r in ratio)
    for i in range(n):
        for j in range(n):
            if s[i] * b[i][j] != -s[j] * b[j][i]:
                raise NotSkewSymmetrizable("witness verification failed")
    return ExchangeMatrix(b, s)


class Seed:
    """An immutable seed: exchange matrix, principal-coefficient block, cluster.

    `bmat` is the top n x n block, `cmat` the bottom n x n block of the
    extended matrix (initially the identity).  `variables` are the cluster
    variables as Laurent polynomials in the initial x's and y's.
    """

    __slots__ = ("n", "b0", "bmat", "cmat", "variables", "history", "skew_symmetrizer")

    def __init__(self, n, b0, bmat, cmat, variables, history, skew_symmetrizer):
        self.n = n
        self.b0 = b0
        self.bmat = bmat
        self.cmat = cmat
        self.variables = tuple(variables)
        self.history = tuple(history)
        self.skew_symmetrizer = tuple(skew_symmetrizer)

    @classmethod
    def initial(cls, matrix: ExchangeMatrix) -> "Seed":
        n = matrix.n
        xs = [LaurentPoly.x_var(n, n, i) for i in range(n)]
        ident = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
        return cls(n, matrix.entries, matrix.entries, ident, xs, (), matrix.skew_symmetrizer)

    # -- readbacks ---------------------------------------------------------

    def grading_weights(self) -> list[tuple[int, ...]]:
        n = self.n
        weights = []
        for i in range(n):
            weights.append(tuple(1 if r == i else 0 for r in range(n)))
        for j in range(n):
            weights.append(tuple(-self.b0[i][j] for i in range(n)))
        return weights

    def f_polynomial(self, i: int) -> LaurentPoly:
        """F-polynomial of cluster variable i (0-based): set all x's to 1."""
        return self.variables[i].set_ones(range(self.n))

    def g_vector(self, i: int) -> tuple[int, ...]:
        return self.variables[i].graded_degree(self.grading_weights())

    def dedup_key(self):
        return frozenset(Counter(self.variables).items())

    # -- mutation ----------------------------------------------------------

    def mutate(self, direction: int) -> "Seed":
        """Mutate in `direction` (1-based, matching the arc indexing)."""
        k = direction - 1
        n = self.n
        if not 0 <= k < n:
            raise ValueError(f"direction {direction} out of range 1..{n}")
        ext = [list(row) for row in self.bmat] + [list(row) for row in self.cmat]
        col_k = [ext[i][k] for i in range(2 * n)]
        new_ext = []
        for i in range(2 * n):
            row = []
            for j in range(n):
                if i == k or j == k:
                    row.append(-ext[i][j])
                else:
                    row.append(ext[i][j] + _sign(ext[i][k]) * max(0, ext[i][k] * ext[k][j]))
            new_ext.append(row)

        pos = LaurentPoly.one(n, n)
        neg = LaurentPoly.one(n, n)
        for i in range(n):
            if col_k[i] > 0:
                pos = pos * self.variables[i] ** col_k[i]
            elif col_k[i] < 0:
                neg = neg * self.variables[i] ** (-col_k[i])
        for j in range(n):
            c = col_k[n + j]
            if c > 0:
                pos = pos * LaurentPoly.y_var(n, n, j) ** c
            elif c < 0:
                neg = neg * LaurentPoly.y_var(n, n, j) ** (-c)
        new_var = (pos + neg).exact_div(self.variables[k])

        variables = list(self.variables)
        variables[k] = new_var
        return Seed(
            n,
            self.b0,
            tuple(tuple(r) for r in new_ext[:n]),
            tuple(tuple(r) for r in new_ext[n:]),
            variables,
            self.history + (direction,),
            self.skew_symmetrizer,
        )


def enumerate_variables(matrix: ExchangeMatrix, max_depth: int):
    """All (g-vector, F-polynomial) pairs reachable by mutation.

    Breadth-first over mutation directions with seeds deduplicated by their
    unordered cluster.  If the exchange graph has not closed after exploring
    `max_depth` layers the type is infinite (or the depth too small) and
    DepthExceeded is raised; max_depth = 0 just reports the initial seed.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    seed = Seed.initial(matrix)
    seen = {seed.dedup_key()}
    found: dict[tuple[int, ...], LaurentPoly] = {}
    for i in range(matrix.n):
        found[seed.g_vector(i)] = seed.f_polynomial(i)
    layer = [seed]
    for _ in range(max_depth):
        next_layer = []
        for s in layer:
            for direction in range(1, matrix.n + 1):
                t = s.mutate(direction)
                key = t.dedup_key()
                if key in seen:
                    continue
                seen.add(key)
                next_layer.append(t)
                for i in range(matrix.n):
                    found[t.g_vector(i)] = t.f_polynomial(i)
        if not next_layer:
            return {(g, f) for g, f in found.items()}
        layer = next_layer
    if max_depth == 0:
        return {(g, f) for g, f in found.items()}
    raise DepthExceeded(f"exchange graph still open after depth {max_depth}")


def render_enumeration(pairs) -> list[str]:
    """One line per variable in the `g=<vector> F=<polynomial>` format."""
    lines = []
    for g, f in sorted(pairs, key=lambda p: (tuple(-v for v in p[0]), p[1].render())):
        vec = "(" + ",".join(str(v) for v in g) + ")"
        lines.append(f"g={vec} F={f.render()}")
    return lines
