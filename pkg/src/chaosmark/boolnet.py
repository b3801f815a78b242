"""Bit-vector configurations and asynchronous Boolean network iteration.

Configurations are tuples of 0/1 ints of fixed length n.  Component indices
are 1-based at the API boundary: ``bits[0]`` holds component 1.  ``deci``
reads a configuration as a binary number with component 1 as the most
significant bit.
"""

from __future__ import annotations

import itertools

__all__ = [
    "BooleanMap",
    "as_bits",
    "deci",
    "bits_from_deci",
    "async_step",
    "iterate",
    "random_truth_table",
]

MAX_TABLE_SIZE = 16  # explicit truth tables stay exhaustively verifiable


def as_bits(values, n=None):
    """Normalize a bit sequence to a validated tuple of 0/1 ints."""
    bits = tuple(int(b) for b in values)
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {b}")
    if n is not None and len(bits) != n:
        raise ValueError(f"expected {n} bits, got {len(bits)}")
    return bits


def deci(bits):
    """Decimal value of a configuration, component 1 being the MSB."""
    value = 0
    for b in bits:
        value = (value << 1) | b
    return value


def bits_from_deci(value, n):
    """Inverse of :func:`deci` for length-n configurations."""
    if not 0 <= value < (1 << n):
        raise ValueError(f"value {value} out of range for {n} bits")
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


class BooleanMap:
    """A map f: B^n -> B^n evaluable one component at a time.

    Three kinds are supported:

    * ``neg``  -- every component is complemented;
    * ``fqq``  -- odd components are complemented, even components are
      xor-ed with their left neighbour;
    * ``table`` -- explicit truth table, input indexed by :func:`deci`.
    """

    NEG = "neg"
    FQQ = "fqq"
    TABLE = "table"

    def __init__(self, n, kind, table=None):
        if n < 1:
            raise ValueError("map size must be >= 1")
        if kind not in (self.NEG, self.FQQ, self.TABLE):
            raise ValueError(f"unknown map kind {kind!r}")
        if kind == self.TABLE:
            if n > MAX_TABLE_SIZE:
                raise ValueError(f"truth tables limited to n <= {MAX_TABLE_SIZE}")
            if table is None or len(table) != (1 << n):
                raise ValueError(f"truth table must carry exactly {1 << n} entries")
            table = tuple(as_bits(row, n) for row in table)
        elif table is not None:
            raise ValueError("table only valid for kind='table'")
        self.n = n
        self.kind = kind
        self.table = table

    @classmethod
    def negation(cls, n):
        return cls(n, cls.NEG)

    @classmethod
    def fqq(cls, n):
        return cls(n, cls.FQQ)

    @classmethod
    def from_table(cls, table):
        n = len(table[0]) if hasattr(table[0], "__len__") else 1
        return cls(n, cls.TABLE, table=table)

    def component(self, i, bits):
        """Value of f_i(x) for 1-based i."""
        if not 1 <= i <= self.n:
            raise IndexError(f"component index {i} out of range 1..{self.n}")
        if self.kind == self.NEG:
            return 1 - bits[i - 1]
        if self.kind == self.FQQ:
            if i % 2 == 1:
                return 1 - bits[i - 1]
            return bits[i - 1] ^ bits[i - 2]
        return self.table[deci(bits)][i - 1]

    def apply(self, bits):
        """Full parallel application f(x)."""
        bits = as_bits(bits, self.n)
        if self.kind == self.TABLE:
            return self.table[deci(bits)]
        return tuple(self.component(i, bits) for i in range(1, self.n + 1))

    def __repr__(self):
        return f"BooleanMap(n={self.n}, kind={self.kind!r})"


def async_step(f, i, bits):
    """One asynchronous update: replace component i of x by f_i(x)."""
    bits = as_bits(bits, f.n)
    if not 1 <= i <= f.n:
        raise IndexError(f"index {i} out of range 1..{f.n}")
    new = f.component(i, bits)
    if new == bits[i - 1]:
        return bits
    return bits[: i - 1] + (new,) + bits[i:]


def iterate(f, strategy, bits, steps=None):
    """Fold ``steps`` asynchronous updates of f over x, driven by ``strategy``.

    The strategy is a materialized sequence of 1-based component indices;
    generators are not accepted so that runs stay replayable.  Returns the
    configuration after the requested number of steps.
    """
    terms = [int(t) for t in strategy]
    q = len(terms) if steps is None else int(steps)
    if q < 0:
        raise ValueError("step count must be >= 0")
    if q > len(terms):
        raise ValueError(f"strategy has {len(terms)} terms, {q} steps requested")
    x = list(as_bits(bits, f.n))
    n = f.n
    for t in terms[:q]:
        if not 1 <= t <= n:
            raise ValueError(f"strategy term {t} outside 1..{n}")
    kind = f.kind
    if kind == BooleanMap.NEG:
        for t in terms[:q]:
            x[t - 1] ^= 1
    elif kind == BooleanMap.FQQ:
        for t in terms[:q]:
            if t & 1:
                x[t - 1] ^= 1
            else:
                x[t - 1] ^= x[t - 2]
    else:
        table = f.table
        for t in terms[:q]:
            x[t - 1] = table[deci(x)][t - 1]
    return tuple(x)


def random_truth_table(rng, n):
    """Draw a uniformly random truth table over B^n (for tests and demos)."""
    return [tuple(int(b) for b in rng.integers(0, 2, size=n)) for _ in range(1 << n)]


def all_configurations(n):
    """Iterate B^n in deci order."""
    return itertools.product((0, 1), repeat=n)
