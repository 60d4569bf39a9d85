"""Secular equations of the point-scatterer spectrum on the square torus.

Between every pair of consecutive representable integers n_j < n_{j+1} the
perturbed operator has exactly one new eigenvalue lambda_j, the unique root
of a strictly increasing secular function:

  weak coupling:    sum_{n in N, n <= X} r2(n) [ 1/(n - lam) - n/(n^2+1) ]
                      + pi * log( sqrt(X^2+1) / (X - lam) )   =  theta
  strong coupling:  sum_{|n - n_j| <= sqrt(n_j), n in N} r2(n)/(n - lam)
                      =  beta_c * (log lam)^beta_b

The weak series is truncated at X = max(multiplier*lam, lam + min_span) and
completed by the closed-form integral tail (the log term above), which
follows from 1/(t-lam) - t/(t^2+1) having antiderivative
log((t-lam)/sqrt(t^2+1)).  Truncation leaves a fluctuation-driven residual
(the lattice remainder r2 - pi oscillates), so a root is a well-defined
function of table + config; different cutoff policies move roots slightly.
solve_range therefore freezes one cutoff per solver chunk — every interval
in the chunk sees a bound at least as large as its own policy bound — and is
bit-deterministic for a given configuration, threads or not.

Large ranges use a far-field expansion: lattice points outside a window
around the current chunk enter through the moments
S_k = sum w (n-c)^{-(k+1)}, so each secular evaluation costs O(near + K)
instead of O(|N|).  With window half-width W >= 4 * max|lam - c| the
truncated geometric series converges like 4^{-K}; K = 26 keeps that error
near 1e-13, far below root_tol.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .arithmetic import ArithmeticTable

_FAR_ORDER = 26            # far-field moment count; error ~ (1/4)^K
_BISECT_WIDTH = 1e-3       # hand over from bisection to secant below this


class SecularPoleError(ValueError):
    """lambda sits exactly on a representable integer (a pole)."""


class TruncationError(ValueError):
    """Required weak-coupling cutoff exceeds the sieved range."""


class WindowOverflowError(ValueError):
    """Strong-coupling window n_j + sqrt(n_j) sticks out past x_max."""


class EmptyWindowError(ValueError):
    """No spectrum records at or below the requested x."""


class NoRootError(RuntimeError):
    """The secular equation has no sign change on the interval."""


class NoConvergenceError(RuntimeError):
    """Root refinement exhausted its iteration budget."""


@dataclass(frozen=True)
class CutoffPolicy:
    """Weak-coupling truncation rule X = max(multiplier*max(lam,1), lam + min_span)."""

    multiplier: float = 10.0
    min_span: float = 1.0e4
    tail_correction: bool = True

    def __post_init__(self):
        if self.multiplier < 10.0:
            raise ValueError("cutoff multiplier must be >= 10")
        if self.min_span <= 0:
            raise ValueError("min_span must be positive")

    def bound(self, lam: float) -> float:
        return max(self.multiplier * max(lam, 1.0), lam + self.min_span)


@dataclass(frozen=True)
class CouplingConfig:
    mode: str                      # "weak" or "strong"
    theta: float = 0.0             # weak RHS: c0 tan(phi/2), one free parameter
    beta_c: float = 1.0            # strong RHS scale
    beta_b: float = 0.0            # strong RHS exponent, in [0, 1)
    cutoff: CutoffPolicy = field(default_factory=CutoffPolicy)
    root_tol: float = 1.0e-9

    def __post_init__(self):
        if self.mode not in ("weak", "strong"):
            raise ValueError(f"mode must be 'weak' or 'strong', got {self.mode!r}")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if not 0.0 <= self.beta_b < 1.0:
            raise ValueError("beta_b must lie in [0, 1)")

    def rhs(self, lam: float) -> float:
        if self.mode == "weak":
            return self.theta
        if self.beta_b == 0.0:
            return self.beta_c
        if lam <= 1.0:
            raise ValueError("strong RHS (log lam)^beta_b needs lam > 1 when beta_b > 0")
        return self.beta_c * math.log(lam) ** self.beta_b


@dataclass(frozen=True)
class SebaSpectrum:
    """Solved records: for each interval index j, n_j < lambda_j < n_{j+1}."""

    j: np.ndarray          # global interval index into table.representable
    n_left: np.ndarray
    n_right: np.ndarray
    lam: np.ndarray
    gap_left: np.ndarray   # lambda_j - n_j
    gap_right: np.ndarray  # n_{j+1} - lambda_j
    delta: np.ndarray      # min of the two gaps
    n_tilde: np.ndarray    # nearest Laplace eigenvalue, ties -> the smaller

    def __len__(self) -> int:
        return len(self.lam)

    @classmethod
    def from_solutions(cls, j: np.ndarray, n_left: np.ndarray,
                       n_right: np.ndarray, lam: np.ndarray) -> "SebaSpectrum":
        gap_left = lam - n_left
        gap_right = n_right - lam
        delta = np.minimum(gap_left, gap_right)
        n_tilde = np.where(gap_left <= gap_right, n_left, n_right)
        return cls(j=np.asarray(j, dtype=np.int64), n_left=np.asarray(n_left),
                   n_right=np.asarray(n_right), lam=np.asarray(lam),
                   gap_left=gap_left, gap_right=gap_right, delta=delta,
                   n_tilde=n_tilde)

    def rows(self) -> Iterable[tuple]:
        for k in range(len(self.lam)):
            yield (int(self.j[k]), float(self.n_left[k]), float(self.n_right[k]),
                   float(self.lam[k]), float(self.gap_left[k]),
                   float(self.gap_right[k]), float(self.delta[k]),
                   float(self.n_tilde[k]))


# ---------------------------------------------------------------------------
# secular functions
# ---------------------------------------------------------------------------

def _check_pole(lam: float, table: ArithmeticTable) -> None:
    r = round(lam)
    if lam == r and 0 <= r <= table.x_max and table.r2[int(r)] > 0:
        raise SecularPoleError(f"lambda={lam} is a representable integer (pole)")


def _tail_term(lam, x_cutoff: float):
    # pi * integral_X^inf [1/(t-lam) - t/(t^2+1)] dt, in closed form
    return math.pi * np.log(math.sqrt(x_cutoff * x_cutoff + 1.0) / (x_cutoff - lam))


def weak_secular(lam: float, table: ArithmeticTable, config: CouplingConfig,
                 x_cutoff: Optional[float] = None) -> float:
    """Left-hand side of the weak-coupling secular equation at lam.

    The cutoff defaults to config.cutoff.bound(lam); passing x_cutoff pins it
    (solvers freeze one cutoff per interval so the iterated function does not
    jump between evaluations).  Raises SecularPoleError on lam in N and
    TruncationError when the bound exceeds the sieved range.
    """
    lam = float(lam)
    _check_pole(lam, table)
    x = float(x_cutoff) if x_cutoff is not None else config.cutoff.bound(lam)
    if x < 10.0 * max(lam, 1.0):
        raise ValueError("truncation bound below 10*max(lambda, 1)")
    if x > table.x_max:
        raise TruncationError(
            f"cutoff {x:.6g} exceeds sieved x_max={table.x_max}; build a larger table")
    rep = table.representable
    hi = int(np.searchsorted(rep, x, side="right"))
    n = rep[:hi].astype(np.float64)
    w = table.r2[rep[:hi]].astype(np.float64)
    value = float(np.dot(w, 1.0 / (n - lam) - n / (n * n + 1.0)))
    if config.cutoff.tail_correction:
        value += float(_tail_term(lam, x))
    return value


def strong_secular(lam: float, j: int, table: ArithmeticTable) -> float:
    """Window sum  sum_{n in N, |n - n_j| <= sqrt(n_j)} r2(n)/(n - lam)."""
    rep = table.representable
    n_j = int(rep[j])
    half = math.sqrt(n_j)
    if n_j + half > table.x_max:
        raise WindowOverflowError(
            f"window of n_j={n_j} reaches {n_j + half:.1f} > x_max={table.x_max}")
    lo = int(np.searchsorted(rep, n_j - half, side="left"))
    hi = int(np.searchsorted(rep, n_j + half, side="right"))
    n = rep[lo:hi].astype(np.float64)
    if np.any(n == lam):
        raise SecularPoleError(f"lambda={lam} hits a pole inside the window")
    w = table.r2[rep[lo:hi]].astype(np.float64)
    return float(np.dot(w, 1.0 / (n - lam)))


# ---------------------------------------------------------------------------
# scalar root finding: bisection to a narrow bracket, then safeguarded secant
# ---------------------------------------------------------------------------

def _refine_root(g: Callable[[float], float], lo: float, hi: float,
                 root_tol: float, max_iter: int = 200) -> float:
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo > 0.0 or g_hi < 0.0:
        raise NoRootError(
            f"no sign change on [{lo}, {hi}]: g({lo})={g_lo:.3g}, g({hi})={g_hi:.3g}")
    width_floor = 8.0 * math.ulp(max(abs(lo), abs(hi)))
    if width_floor > root_tol:
        raise NoConvergenceError(
            f"root_tol={root_tol} is below the floating resolution "
            f"~{width_floor:.3g} of this interval")
    for _ in range(max_iter):
        if hi - lo <= root_tol:
            return 0.5 * (lo + hi)
        if hi - lo > _BISECT_WIDTH:
            mid = 0.5 * (lo + hi)
        else:
            # secant proposal, safeguarded to stay well inside the bracket
            mid = lo - g_lo * (hi - lo) / (g_hi - g_lo)
            frac = (mid - lo) / (hi - lo)
            if not 0.02 <= frac <= 0.98:
                mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if g_mid < 0.0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    raise NoConvergenceError(
        f"root_tol={root_tol} not reached in {max_iter} iterations on "
        f"[{lo}, {hi}] (tolerance may be below floating resolution)")


def _inward(a: float, sign: float) -> float:
    return a + sign * 1e-12 * max(1.0, abs(a))


def solve_interval(j: int, table: ArithmeticTable, config: CouplingConfig) -> float:
    """The unique root of (mode secular)(lam) = RHS on (n_j, n_{j+1}).

    j indexes table.representable.  The weak cutoff is frozen at the value
    the policy assigns to the right endpoint, which dominates every lam in
    the interval.
    """
    rep = table.representable
    if not 0 <= j < len(rep) - 1:
        raise IndexError(f"interval index {j} out of range")
    n_lo, n_hi = float(rep[j]), float(rep[j + 1])
    if config.mode == "weak":
        x = config.cutoff.bound(n_hi)
        if x > table.x_max:
            raise TruncationError(
                f"cutoff {x:.6g} for interval ({n_lo}, {n_hi}) exceeds x_max")
        hi_idx = int(np.searchsorted(rep, x, side="right"))
        n = rep[:hi_idx].astype(np.float64)
        w = table.r2[rep[:hi_idx]].astype(np.float64)
        base = w * n / (n * n + 1.0)
        const = -float(base.sum())
        tail_on = config.cutoff.tail_correction

        def g(lam: float) -> float:
            v = float(np.dot(w, 1.0 / (n - lam))) + const
            if tail_on:
                v += float(_tail_term(lam, x))
            return v - config.rhs(lam)
    else:
        half = math.sqrt(n_lo)
        if n_lo + half > table.x_max:
            raise WindowOverflowError(
                f"window of n_j={n_lo:.0f} exceeds x_max={table.x_max}")
        lo_idx = int(np.searchsorted(rep, n_lo - half, side="left"))
        hi_idx = int(np.searchsorted(rep, n_lo + half, side="right"))
        n = rep[lo_idx:hi_idx].astype(np.float64)
        w = table.r2[rep[lo_idx:hi_idx]].astype(np.float64)

        def g(lam: float) -> float:
            return float(np.dot(w, 1.0 / (n - lam))) - config.rhs(lam)

    return _refine_root(g, _inward(n_lo, +1.0), _inward(n_hi, -1.0),
                        config.root_tol)


def solve_ground(table: ArithmeticTable, config: CouplingConfig) -> float:
    """Root on the ground interval (-inf, n_0): bracket expands leftward.

    Skipped by solve_range (the asymptotics of interest are lam -> +inf);
    provided for completeness.  In strong mode the window is {0} and the
    equation -1/lam = beta has a root only for positive RHS.
    """
    if config.mode == "weak":
        def g(lam: float) -> float:
            return weak_secular(lam, table, config) - config.rhs(lam)
    else:
        if config.beta_b != 0.0:
            raise ValueError("ground interval needs beta_b = 0 (log lam undefined)")

        def g(lam: float) -> float:
            return strong_secular(lam, 0, table) - config.rhs(lam)

    hi = _inward(0.0, -1.0) - 1e-12
    lo = -2.0
    for _ in range(60):
        if g(lo) < 0.0:
            break
        lo *= 2.0
    else:
        raise NoRootError("ground-interval bracket did not capture a sign change")
    return _refine_root(g, lo, hi, config.root_tol)


# ---------------------------------------------------------------------------
# ranged solving: lockstep vectorized solver over chunks of intervals
# ---------------------------------------------------------------------------

def _solve_chunk_weak(rep_f: np.ndarray, w_f: np.ndarray, j_lo: int, j_hi: int,
                      config: CouplingConfig, x_max_table: int) -> np.ndarray:
    """Solve intervals j_lo..j_hi (inclusive) in lockstep; returns lam array."""
    lam_top = rep_f[j_hi + 1]
    x = config.cutoff.bound(lam_top)
    if x > x_max_table:
        raise TruncationError(
            f"cutoff {x:.6g} for intervals up to n={lam_top:.0f} exceeds x_max")
    cut = int(np.searchsorted(rep_f, x, side="right"))
    nvals, w = rep_f[:cut], w_f[:cut]

    c = 0.5 * (rep_f[j_lo] + rep_f[j_hi + 1])
    window = max(4.0 * (rep_f[j_hi + 1] - rep_f[j_lo]) / 2.0, 64.0)
    i0 = int(np.searchsorted(nvals, c - window, side="left"))
    i1 = int(np.searchsorted(nvals, c + window, side="right"))
    near_n, near_w = nvals[i0:i1], w[i0:i1]

    # far-field moments S_k = sum w (n-c)^{-(k+1)}; |lam-c| <= window/4
    far_d = np.concatenate((nvals[:i0], nvals[i1:])) - c
    far_w = np.concatenate((w[:i0], w[i1:]))
    inv = 1.0 / far_d
    moments = np.empty(_FAR_ORDER)
    term = far_w * inv
    for k in range(_FAR_ORDER):
        moments[k] = term.sum()
        term *= inv
    const = -float(np.dot(w, nvals / (nvals * nvals + 1.0)))
    tail_on = config.cutoff.tail_correction

    def g_vec(lams: np.ndarray) -> np.ndarray:
        xs = lams - c
        far = np.full_like(xs, moments[_FAR_ORDER - 1])
        for k in range(_FAR_ORDER - 2, -1, -1):
            far = far * xs + moments[k]
        near = (near_w[None, :] / (near_n[None, :] - lams[:, None])).sum(axis=1)
        v = near + far + const
        if tail_on:
            v = v + _tail_term(lams, x)
        return v - config.theta

    left = rep_f[j_lo:j_hi + 1]
    right = rep_f[j_lo + 1:j_hi + 2]
    lo = left + 1e-12 * np.maximum(left, 1.0)
    hi = right - 1e-12 * np.maximum(right, 1.0)
    g_lo, g_hi = g_vec(lo), g_vec(hi)

    while float(np.max(hi - lo)) > _BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        g_mid = g_vec(mid)
        neg = g_mid < 0.0
        lo, g_lo = np.where(neg, mid, lo), np.where(neg, g_mid, g_lo)
        hi, g_hi = np.where(neg, hi, mid), np.where(neg, g_hi, g_mid)

    tol = config.root_tol
    floor = 8.0 * np.spacing(np.abs(hi))
    if float(np.max(floor)) > tol:
        raise NoConvergenceError(
            f"root_tol={tol} is below floating resolution ~{float(np.max(floor)):.3g} "
            f"for intervals near n={rep_f[j_hi + 1]:.0f}")
    for _ in range(80):
        width = hi - lo
        if float(np.max(width)) <= tol:
            break
        denom = g_hi - g_lo
        frac = np.where(denom > 0.0, -g_lo / np.where(denom > 0.0, denom, 1.0), 0.5)
        frac = np.clip(frac, 0.02, 0.98)
        mid = lo + frac * width
        g_mid = g_vec(mid)
        neg = g_mid < 0.0
        lo, g_lo = np.where(neg, mid, lo), np.where(neg, g_mid, g_lo)
        hi, g_hi = np.where(neg, hi, mid), np.where(neg, g_hi, g_mid)
    return 0.5 * (lo + hi)


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SEBALAB_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def solve_range(x_min: int, x_max_solve: int, table: ArithmeticTable,
                config: CouplingConfig, threads: Optional[int] = None,
                chunk: int = 512) -> SebaSpectrum:
    """Solve every interval of N inside [x_min, x_max_solve].

    One record per consecutive pair; records are sorted by interval index and
    the output is identical for any thread count (chunks are fixed by index,
    each chunk is solved independently, and results are reassembled in
    order).  Weak mode runs the far-field lockstep solver; strong mode
    iterates intervals with their local windows.
    """
    rep = table.representable
    if x_max_solve + math.sqrt(max(x_max_solve, 0)) > table.x_max:
        raise WindowOverflowError(
            f"x_max_solve={x_max_solve} needs sieved range past x_max={table.x_max}")
    i_lo = int(np.searchsorted(rep, x_min, side="left"))
    i_hi = int(np.searchsorted(rep, x_max_solve, side="right")) - 1
    if i_hi - i_lo < 1:
        raise EmptyWindowError(f"fewer than two elements of N in [{x_min}, {x_max_solve}]")
    js = np.arange(i_lo, i_hi, dtype=np.int64)

    if config.mode == "weak":
        rep_f = rep.astype(np.float64)
        w_f = table.r2[rep].astype(np.float64)
        blocks: List[Tuple[int, int]] = [
            (int(a), int(min(a + chunk - 1, i_hi - 1))) for a in range(i_lo, i_hi, chunk)]

        def run(block: Tuple[int, int]) -> np.ndarray:
            return _solve_chunk_weak(rep_f, w_f, block[0], block[1], config,
                                     table.x_max)

        n_workers = _thread_count(threads)
        if n_workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                parts = list(pool.map(run, blocks))
        else:
            parts = [run(b) for b in blocks]
        lam = np.concatenate(parts)
    else:
        lam = np.empty(len(js))
        for k, j in enumerate(js):
            try:
                lam[k] = solve_interval(int(j), table, config)
            except (NoRootError, NoConvergenceError) as exc:
                raise type(exc)(
                    f"interval j={int(j)} ({int(rep[j])}, {int(rep[j + 1])}): {exc}") from exc

    return SebaSpectrum.from_solutions(
        js, rep[i_lo:i_hi].astype(np.float64), rep[i_lo + 1:i_hi + 1].astype(np.float64), lam)


# ---------------------------------------------------------------------------
# spacing statistics
# ---------------------------------------------------------------------------

def spacing_stats(spec: SebaSpectrum, x: float) -> Tuple[float, float, int]:
    """(mean Delta, mean gap_left, count) over records with lambda_k <= x."""
    mask = spec.lam <= x
    count = int(mask.sum())
    if count == 0:
        raise EmptyWindowError(f"no records with lambda <= {x}")
    return (float(spec.delta[mask].mean()),
            float(spec.gap_left[mask].mean()), count)


def alpha_estimate(spec: SebaSpectrum,
                   x_grid: Sequence[float]) -> List[Tuple[float, float]]:
    """Per-x exponent estimates (x, log mean_Delta(x) / log log x).

    Models mean Delta ~ (log x)^alpha.  The estimate reflects the scales
    actually present below x: a spectrum concentrated near x recovers a
    synthetic exponent sharply, while records spread over many decades mix
    scales (the cumulative mean is dominated by small lambda), so no limit
    is asserted here — the sequence itself is the deliverable.
    """
    out: List[Tuple[float, float]] = []
    for x in x_grid:
        if x <= math.e:
            raise ValueError(f"x={x} too small: log log x must be positive")
        mean_delta, _, _ = spacing_stats(spec, x)
        out.append((float(x), math.log(mean_delta) / math.log(math.log(x))))
    return out
