"""The dyadic odometer, a Z2 cocycle over it, and the resulting skew product.

The von Neumann-Kakutani adding machine T translates each band
[1 - 2^-n, 1 - 2^-(n+1)) onto [2^-(n+1), 2^-n); in binary it is "add one
with carry from the left".  The working partition consists of the 2^K
dyadic atoms of level K.  T maps atoms onto atoms, and in tower order
(atom t sits at tower position bitreverse_K(t)) it is exactly the cyclic
successor, so T^m on atoms is an index shift by m modulo 2^K.

The fiber cocycle phi takes the value 0 on
[1 - 2^-n, 1 - 2^-n + 2^-(n+2)) and 1 on the remaining half of each band.
phi is constant on every level-K atom except the top two (the band K-1
atom, which phi splits in half, and the final atom [1 - 2^-K, 1), where
the bands accumulate).  A Birkhoff window of length m <= 2^(K-4) reads
each of those dirty atoms at most once, and each read splits the mass of
the starting atom into exactly equal parity halves with a common target
atom, so correlations of atom-unions remain exact: a window with one
dirty read contributes exactly half its mass to each parity.  The region
[1 - 2^-L, 1) is still charged to the error bound of correlation values,
since the cocycle's discontinuities accumulate at 1.

The skew product acts on [0,1) x Z2 by T_phi(x, g) = (Tx, phi(x) + g)
with the uniform fiber measure (mass 1/2 per fiber point).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "Boundary",
    "BOUNDARY",
    "DyadicInterval",
    "DyadicStep",
    "SkewSystem",
    "SpectralCoefficient",
    "IndexTooLarge",
    "odometer_map",
    "mn_cocycle",
    "cocycle_sum",
    "skew_correlation",
    "spectral_coefficient",
    "rigidity_sequence",
    "FIRST_DIGIT_SIGN",
    "CONSTANT_ONE",
]

from .rankone import BoundedValue


class SkewError(Exception):
    pass


class IndexTooLarge(SkewError):
    pass


class Boundary:
    """Sentinel for Birkhoff sums that cannot be resolved at level K."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Boundary"


BOUNDARY = Boundary()


def odometer_map(x: Fraction) -> Fraction:
    """Exact adding-machine image of a dyadic rational in [0, 1)."""
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    y = 1 - x  # 2^-(n+1) < y <= 2^-n picks the band
    n = 0
    while y <= Fraction(1, 2 ** (n + 1)):
        n += 1
    return x + Fraction(3, 2 ** (n + 1)) - 1


def mn_cocycle(x: Fraction) -> int:
    """The half-and-half band cocycle: 0 on the first half of each band."""
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    y = 1 - x
    n = 0
    while y <= Fraction(1, 2 ** (n + 1)):
        n += 1
    offset = x - (1 - Fraction(1, 2**n))
    return 0 if offset < Fraction(1, 2 ** (n + 2)) else 1


@dataclass(frozen=True)
class DyadicInterval:
    """[numerator / 2^level, (numerator + 1) / 2^level)."""

    numerator: int
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if not 0 <= self.numerator < 2**self.level:
            raise ValueError("numerator outside [0, 2^level)")

    @property
    def width(self) -> Fraction:
        return Fraction(1, 2**self.level)

    @property
    def left(self) -> Fraction:
        return Fraction(self.numerator, 2**self.level)

    @classmethod
    def parse(cls, text: str) -> "DyadicInterval":
        """Accepts `num/2^K` (also `num/2**K`)."""
        num_s, _, den_s = text.partition("/")
        den_s = den_s.replace("**", "^")
        if not den_s.startswith("2^"):
            raise ValueError("expected num/2^K")
        return cls(int(num_s), int(den_s[2:]))


@dataclass(frozen=True)
class DyadicStep:
    """A step function constant on the dyadic atoms of a given level."""

    level: int
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != 2**self.level:
            raise ValueError("need one value per level atom")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


FIRST_DIGIT_SIGN = DyadicStep(1, (1.0, -1.0))
CONSTANT_ONE = DyadicStep(0, (1.0,))


def _bit_reverse_permutation(K: int) -> np.ndarray:
    u = np.arange(2**K, dtype=np.int64)
    r = np.zeros_like(u)
    for b in range(K):
        r |= ((u >> b) & 1) << (K - 1 - b)
    return r


class SkewSystem:
    """Exact atom-level model of the skew product at partition level K.

    Z2 fibers only; the cocycle is either the built-in band cocycle or a
    user dyadic step function with values in {0, 1} and breakpoints of
    level <= K (such cocycles are constant on all atoms).
    """

    def __init__(self, atom_level: int = 20, boundary_cutoff: int = 16,
                 cocycle: DyadicStep | None = None):
        if not 1 <= boundary_cutoff <= atom_level:
            raise ValueError("need 1 <= L <= K")
        if atom_level > 26:
            raise ValueError("atom level capped at 26")
        if cocycle is None and boundary_cutoff > atom_level - 1:
            raise ValueError("band cocycle needs L <= K - 1 for atom constancy")
        if cocycle is not None:
            if cocycle.level > atom_level:
                raise ValueError("cocycle breakpoints finer than the atoms")
            if any(v not in (0.0, 1.0) for v in cocycle.values):
                raise ValueError("cocycle values must lie in {0, 1}")
        self.K = atom_level
        self.L = boundary_cutoff
        self.cocycle = cocycle
        self._built = False

    # -- lazy tables ---------------------------------------------------

    def _build(self) -> None:
        if self._built:
            return
        K = self.K
        M = 2**K
        rev = _bit_reverse_permutation(K)
        t = np.arange(M, dtype=np.int64)
        if self.cocycle is None:
            # band index: atom t lies in band n = K - bitlength(2^K - 1 - t)
            z = (M - 1 - t).astype(np.float64)
            n = np.zeros(M, dtype=np.int64)
            nz = z > 0
            n[nz] = K - np.frexp(z[nz])[1]
            n[~nz] = K
            band_start = M - (1 << np.minimum(K - n, K))
            half = 1 << np.maximum(K - n - 2, 0)
            phi = ((t - band_start) >= half).astype(np.int64)
            dirty_atoms = np.array([M - 2, M - 1], dtype=np.int64)
            phi[dirty_atoms] = 0  # excluded from sums; handled as mass splits
        else:
            shift = K - self.cocycle.level
            phi = np.asarray(self.cocycle.values, dtype=np.int64)[t >> shift]
            dirty_atoms = np.array([], dtype=np.int64)
        self._phi_atom = phi
        self._rev = rev  # involution: atom <-> tower position
        phi_tower = phi[rev]
        self._cum = np.concatenate(([0], np.cumsum(phi_tower)))
        self._dirty_idx = np.sort(rev[dirty_atoms]) if len(dirty_atoms) else dirty_atoms
        self._idx_all = np.arange(M, dtype=np.int64)
        self._g_cache: dict[tuple, np.ndarray] = {}
        self._built = True

    @property
    def atom_count(self) -> int:
        return 2**self.K

    @property
    def atom_width(self) -> Fraction:
        return Fraction(1, 2**self.K)

    def max_window(self) -> int:
        return 2 ** (self.K - 4)

    # -- per-window machinery -------------------------------------------

    def _window_parity_and_dirty(self, idx: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Parity of the clean Birkhoff reads and dirty-read counts over
        the tower-order windows [idx, idx + m)."""
        self._build()
        M = self.atom_count
        P = self._cum
        j = idx + m
        wrapped = j > M
        jc = np.where(wrapped, j - M, j)
        sums = P[jc] - P[idx] + np.where(wrapped, P[M], 0)
        dirty = np.zeros(len(idx), dtype=np.int64)
        for D in self._dirty_idx:
            dirty += ((D - idx) % M) < m
        return (sums & 1).astype(np.int64), dirty

    def _full_window_signs(self, m: int) -> np.ndarray:
        """(-1)^parity over the windows [i, i + m) for every tower index,
        with 0 at indices whose window has an unresolvable read.  Built
        from cumulative-sum slices; no gathers."""
        self._build()
        M = self.atom_count
        P = self._cum
        sums = np.empty(M, dtype=np.int64)
        if m == 0:
            sums.fill(0)
        else:
            sums[: M - m] = P[m:M] - P[: M - m]
            sums[M - m :] = (P[M] - P[M - m : M]) + P[:m]
        signs = (1.0 - 2.0 * (sums & 1)).astype(np.float64)
        for D in self._dirty_idx:
            lo = int(D) - m + 1
            if lo < 0:
                signs[lo + M :] = 0.0
                signs[: int(D) + 1] = 0.0
            else:
                signs[lo : int(D) + 1] = 0.0
        return signs

    def atom_indices(self, interval: DyadicInterval) -> np.ndarray:
        if interval.level > self.K:
            raise ValueError("interval finer than the atom partition")
        count = 1 << (self.K - interval.level)
        start = interval.numerator << (self.K - interval.level)
        return np.arange(start, start + count, dtype=np.int64)

    def region_overlap(self, interval: DyadicInterval) -> Fraction:
        """Mass of the interval inside the boundary region [1 - 2^-L, 1)."""
        start = interval.numerator << (self.K - interval.level)
        stop = start + (1 << (self.K - interval.level))
        region_start = self.atom_count - (1 << (self.K - self.L))
        return max(0, stop - max(start, region_start)) * self.atom_width


def cocycle_sum(atom: DyadicInterval, m: int, sys: SkewSystem) -> int | Boundary:
    """Parity of the Birkhoff sum phi_m on one atom, or Boundary.

    Boundary is returned when the orbit window reads an atom on which the
    cocycle is not constant (those reads split the atom's mass in half).
    """
    if atom.level != sys.K:
        raise ValueError("atom level must equal the system's atom level")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m > sys.max_window():
        raise IndexTooLarge(f"window {m} exceeds 2^(K-4) = {sys.max_window()}")
    if m == 0:
        return 0
    sys._build()
    idx = np.array([sys._rev[atom.numerator]], dtype=np.int64)
    parity, dirty = sys._window_parity_and_dirty(idx, m)
    if dirty[0] > 0:
        return BOUNDARY
    return int(parity[0])


def skew_correlation(
    A: DyadicInterval, eps: int, eps2: int, m: int, sys: SkewSystem
) -> BoundedValue:
    """mu x h ( T_phi^m (A x {eps}) cap (A x {eps2}) ), exact atom count.

    Atoms whose window contains exactly one unresolvable cocycle read
    contribute exactly half their fiber mass to each parity; windows with
    two such reads (impossible for m <= 2^(K-4)) and the boundary region
    intersected with A are charged to the error bound.
    """
    if eps not in (0, 1) or eps2 not in (0, 1):
        raise ValueError("fiber points must be 0 or 1")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m > sys.max_window():
        raise IndexTooLarge(f"shift {m} exceeds 2^(K-4) = {sys.max_window()}")
    sys._build()
    w = float(sys.atom_width)
    atoms = sys.atom_indices(A)
    if m == 0:
        value = len(atoms) * w / 2 if eps == eps2 else 0.0
        return BoundedValue(value=value, error_bound=0.0, exact=True)
    M = sys.atom_count
    idx = sys._rev[atoms]
    target_atoms = sys._rev[(idx + m) % M]
    shift = sys.K - A.level
    in_A = (target_atoms >> shift) == A.numerator
    parity, dirty = sys._window_parity_and_dirty(idx, m)
    match = ((eps + parity) % 2) == eps2
    clean = dirty == 0
    split = dirty == 1
    bad = dirty >= 2
    value = w / 2 * (np.count_nonzero(clean & match & in_A)
                     + 0.5 * np.count_nonzero(split & in_A))
    eb = float(sys.region_overlap(A)) / 2 + w / 2 * int(np.count_nonzero(bad))
    return BoundedValue(value=float(value), error_bound=eb, exact=False)


@dataclass(frozen=True)
class SpectralCoefficient:
    index: int
    value: float
    error_bound: float
    function_tag: str


def _g_tower(sys: SkewSystem, g: DyadicStep) -> np.ndarray:
    if g.level > sys.K:
        raise ValueError("step function finer than the atom partition")
    sys._build()
    key = (g.level, g.values)
    cached = sys._g_cache.get(key)
    if cached is None:
        garr = np.asarray(g.values, dtype=np.float64)[sys._idx_all >> (sys.K - g.level)]
        cached = garr[sys._rev]
        if len(sys._g_cache) < 16:
            sys._g_cache[key] = cached
    return cached


def spectral_coefficient(
    g: DyadicStep, fiber: str, n: int, sys: SkewSystem
) -> SpectralCoefficient:
    """<U^n f, f> for f = g (x) 1 or f = g (x) chi, chi(g) = (-1)^g.

    For g (x) 1 this is the base-odometer correlation of g (exact).  For
    g (x) chi the fiber character turns the Birkhoff parity into a sign:
    sum over atoms of width * g(T^n x) g(x) * (-1)^{phi_n(x)}; atoms with
    one unresolvable read contribute exactly 0 (their sign mass cancels).
    """
    if fiber not in ("one", "chi"):
        raise ValueError("fiber must be 'one' or 'chi'")
    limit = 2 ** (sys.L - 4)
    if abs(n) > limit:
        raise IndexTooLarge(f"|n| must be <= 2^(L-4) = {limit}")
    sys._build()
    tag = "g(x)1" if fiber == "one" else "g(x)chi"
    w = float(sys.atom_width)
    G = _g_tower(sys, g)
    m = abs(n)
    # n >= 0 pairs x with T^n x (forward windows); n < 0 pairs x with
    # T^-m x, whose Birkhoff window starts m steps back in tower order.
    prod = G * np.roll(G, -m if n >= 0 else m)
    if fiber == "one":
        value = w * float(prod.sum())
        return SpectralCoefficient(index=n, value=value, error_bound=0.0, function_tag=tag)
    signs = sys._full_window_signs(m)
    if n < 0:
        signs = np.roll(signs, m)  # window of index i starts at i - m
    value = w * float((prod * signs).sum())
    return SpectralCoefficient(index=n, value=value, error_bound=0.0, function_tag=tag)


def rigidity_sequence(
    A: DyadicInterval, eps: int, k_range: Sequence[int], sys: SkewSystem
) -> list[BoundedValue]:
    """skew_correlation(A, eps, eps, 2^k, sys) along the odometer's
    rigidity times 2^k."""
    out = []
    for k in k_range:
        if k < 0 or 2**k > sys.max_window():
            raise IndexTooLarge(f"2^{k} exceeds the window cap 2^(K-4)")
        out.append(skew_correlation(A, eps, eps, 2**k, sys))
    return out
