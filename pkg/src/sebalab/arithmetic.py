"""Arithmetic of sums of two squares.

Sieves and serves all arithmetic inputs of the billiard computation:

  r2(n)     = #{(x, y) in Z^2 : x^2 + y^2 = n}
            = 4 * sum_{d | n} chi4(d)          (chi4 = nontrivial character mod 4)
            = 4 * prod_{p^e || n, p = 1 mod 4} (e + 1)   if every p = 3 mod 4
              divides n to an even power, else 0.
  omega1(n) = number of distinct primes p = 1 mod 4 dividing n (omega1(0) := 0).
  N         = {n : r2(n) > 0}, ascending, n0 = 0 included (r2(0) = 1).
  f(n)      = r2(n) / (4 * 2^omega1(n)), an exact rational.

The sieve is factorization-driven: a smallest-prime-factor table plus a
vectorized exponent-peeling pass evaluates the divisor-character formula in
its multiplicative form (chi4 is totally multiplicative, so
sum_{d|n} chi4(d) = prod_p sum_{k<=e_p} chi4(p^k)).  Everything is exact
integer arithmetic.  Construction may be chunked arbitrarily; the output is
independent of the partition, and the finished table is immutable, so
concurrent readers are safe.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List

import numpy as np

logger = logging.getLogger(__name__)

_HALF_LOG2 = 0.34657359027997264  # (1/2) log 2, the normal-order exponent of log r2

_CACHE_MAGIC = b"SEBA"
_CACHE_VERSION = 1

# Peak transient memory of build_table is ~18 bytes per integer (spf table,
# peel state and the result arrays together).
_BYTES_PER_N = 18
DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3


class CapacityError(Exception):
    """x_max exceeds the configured memory budget."""


class RangeError(ValueError):
    """Query outside the sieved range [0, x_max]."""


@dataclass(frozen=True)
class ArithmeticTable:
    """Sieved arithmetic data on [0, x_max].

    r2 and omega1 are dense arrays indexed by n; representable is the
    ascending set N of n with r2(n) > 0 (0 is a member: the zero vector).
    """

    x_max: int
    r2: np.ndarray        # int32, r2[n]
    omega1: np.ndarray    # int8, omega1[n]
    representable: np.ndarray = field(repr=False)  # int64, ascending

    def __post_init__(self):
        self.r2.setflags(write=False)
        self.omega1.setflags(write=False)
        self.representable.setflags(write=False)

    def check_range(self, x) -> None:
        if not 0 <= x <= self.x_max:
            raise RangeError(f"x={x} outside sieved range [0, {self.x_max}]")

    @property
    def representable_count(self) -> int:
        return int(len(self.representable))


def _smallest_prime_factor(x_max: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for n >= 2 (spf[p] = p for primes)."""
    spf = np.zeros(x_max + 1, dtype=np.int32)
    for p in range(2, int(x_max ** 0.5) + 1):
        if spf[p] == 0:
            sl = spf[p * p::p]
            sl[sl == 0] = p
    unset = np.nonzero(spf == 0)[0]
    spf[unset] = unset
    return spf


def build_table(x_max: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> ArithmeticTable:
    """Sieve r2, omega1 and the representable set on [0, x_max].

    Raises CapacityError if the estimated working set exceeds memory_budget.
    """
    if x_max < 0:
        raise ValueError("x_max must be >= 0")
    if (x_max + 1) * _BYTES_PER_N > memory_budget:
        raise CapacityError(
            f"x_max={x_max} needs ~{(x_max + 1) * _BYTES_PER_N} bytes, "
            f"budget is {memory_budget}")

    n_total = x_max + 1
    if x_max < 2:
        r2 = np.array([1, 4][:n_total], dtype=np.int32)
        omega1 = np.zeros(n_total, dtype=np.int8)
        rep = np.nonzero(r2)[0].astype(np.int64)
        return ArithmeticTable(x_max, r2, omega1, rep)

    spf = _smallest_prime_factor(x_max)
    b1 = np.ones(n_total, dtype=np.int32)    # prod (e_p + 1), p = 1 mod 4
    bad = np.zeros(n_total, dtype=bool)      # odd exponent at some p = 3 mod 4
    omega1 = np.zeros(n_total, dtype=np.int8)

    chunk = 2_000_000
    for lo in range(2, n_total, chunk):
        hi = min(lo + chunk, n_total)
        rem = np.arange(lo, hi, dtype=np.int64)
        pos = np.arange(lo, hi, dtype=np.int64)
        active = np.nonzero(rem > 1)[0]
        while active.size:
            r = rem[active]
            p = spf[r].astype(np.int64)
            e = np.ones(active.size, dtype=np.int64)
            r //= p
            div = r % p == 0
            while div.any():
                j = np.nonzero(div)[0]
                r[j] //= p[j]
                e[j] += 1
                div[j] = r[j] % p[j] == 0
            pm = p & 3
            is1 = pm == 1
            if is1.any():
                tgt = pos[active[is1]]
                b1[tgt] *= (e[is1] + 1).astype(np.int32)
                omega1[tgt] += 1
            is3 = (pm == 3) & (e & 1 == 1)
            if is3.any():
                bad[pos[active[is3]]] = True
            rem[active] = r
            active = active[r > 1]

    r2 = np.where(bad, 0, 4 * b1).astype(np.int32)
    r2[0] = 1
    rep = np.nonzero(r2)[0].astype(np.int64)
    logger.debug("sieved x_max=%d, |N|=%d", x_max, len(rep))
    return ArithmeticTable(x_max, r2, omega1, rep)


def f_value(table: ArithmeticTable, n: int) -> Fraction:
    """f(n) = r2(n) / (4 * 2^omega1(n)) as an exact rational, for n in N, n >= 1."""
    table.check_range(n)
    if n < 1 or table.r2[n] == 0:
        raise ValueError(f"n={n} is not a representable integer >= 1")
    return Fraction(int(table.r2[n]) // 4, 2 ** int(table.omega1[n]))


def summatory_r2(table: ArithmeticTable, x: int) -> int:
    """Exact partial sum sum_{n <= x} r2(n) (the lattice-point count R(x))."""
    table.check_range(x)
    return int(table.r2[:int(x) + 1].sum(dtype=np.int64))


def normal_order_filter(table: ArithmeticTable, epsilon: float, n_min: int) -> np.ndarray:
    """Elements n >= n_min of N with |log r2(n) / log log n - (1/2) log 2| <= epsilon.

    Models the subsequence on which r2 stays close to its logarithmic normal
    order (log n)^{(1/2) log 2 + o(1)}.  Requires n_min >= 16 so log log n > 0.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if n_min < 16:
        raise ValueError("n_min must be >= 16 so that log log n > 0")
    rep = table.representable
    cand = rep[rep >= n_min]
    if cand.size == 0:
        return cand
    ratio = np.log(table.r2[cand].astype(np.float64)) / np.log(np.log(cand.astype(np.float64)))
    return cand[np.abs(ratio - _HALF_LOG2) <= epsilon]


def omega1_histogram(table: ArithmeticTable, x: int) -> Dict[int, int]:
    """Counts {k: #{n in N(x) : omega1(n) = k}}; total equals |N(x)|."""
    table.check_range(x)
    rep = table.representable
    rep = rep[rep <= x]
    counts = np.bincount(table.omega1[rep])
    return {int(k): int(c) for k, c in enumerate(counts) if c > 0}


def landau_ratio(table: ArithmeticTable, x: int) -> float:
    """Empirical |N(x)| * sqrt(log x) / x (Landau's constant is its limit)."""
    table.check_range(x)
    if x < 2:
        raise ValueError("x must be >= 2")
    count = int(np.searchsorted(table.representable, x, side="right"))
    return count * float(np.sqrt(np.log(x))) / x


# ---------------------------------------------------------------------------
# binary cache: magic, version u32, x_max u64, count u64, then delta-encoded N
# (uint32 little-endian; first entry absolute) and per-element r2 (uint32),
# omega1 (uint8).  The stored data round-trips bit-exactly.  Only elements of
# N are serialized; omega1 at non-representable n (where no consumer reads
# it) is reconstructed as 0 on load.
# ---------------------------------------------------------------------------

def save_table(table: ArithmeticTable, path) -> None:
    rep = table.representable
    deltas = np.diff(rep, prepend=0).astype(np.uint32)
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<IQQ", _CACHE_VERSION, table.x_max, len(rep)))
        fh.write(deltas.astype("<u4").tobytes())
        fh.write(table.r2[rep].astype("<u4").tobytes())
        fh.write(table.omega1[rep].astype("u1").tobytes())


def load_table(path) -> ArithmeticTable:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"not an arithmetic cache file: magic {magic!r}")
        version, x_max, count = struct.unpack("<IQQ", fh.read(20))
        if version != _CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        deltas = np.frombuffer(fh.read(4 * count), dtype="<u4")
        r2_rep = np.frombuffer(fh.read(4 * count), dtype="<u4")
        om_rep = np.frombuffer(fh.read(count), dtype="u1")
    rep = np.cumsum(deltas.astype(np.int64))
    r2 = np.zeros(x_max + 1, dtype=np.int32)
    omega1 = np.zeros(x_max + 1, dtype=np.int8)
    r2[rep] = r2_rep.astype(np.int32)
    omega1[rep] = om_rep.astype(np.int8)
    return ArithmeticTable(int(x_max), r2, omega1, rep)


def representable_list(table: ArithmeticTable, x: int) -> List[int]:
    """The set N(x) as a python list (mostly for small-x reporting)."""
    table.check_range(x)
    rep = table.representable
    return rep[rep <= x].tolist()
