"""Orthonormal discrete wavelet transform matrices with dyadic coefficient addressing.

The transform is realized as an explicit n x n orthonormal matrix built by
cascading one-level periodized analysis matrices.  Row order is: the single
approximation row first, then detail rows coarse-to-fine; within a level,
positions run left to right (oldest to newest sample).  Materializing the
matrix keeps support queries and bound computations exact at desk scale
(n <= 4096); an O(n log n) fast path is deliberately not the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import FilterTooLongForSignal, LengthMismatch, NonPowerOfTwo

# Minimum-phase Daubechies low-pass taps, normalized so the taps sum to
# sqrt(2).  DBk has k vanishing moments and 2k taps; Haar is DB1.  Values
# carry 20 significant digits (double precision uses ~17).
_FILTERS: dict[str, tuple[float, ...]] = {
    "haar": (
        0.7071067811865475244,
        0.7071067811865475244,
    ),
    "db2": (
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ),
    "db3": (
        0.332670552950082616,
        0.80689150931109257649,
        0.4598775021184915701,
        -0.1350110200102545887,
        -0.085441273882026661693,
        0.035226291885709536603,
    ),
    "db4": (
        0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105,
    ),
    "db5": (
        0.16010239797419291448,
        0.60382926979718967054,
        0.72430852843777292773,
        0.13842814590132073151,
        -0.24229488706638203186,
        -0.032244869584638374648,
        0.077571493840045713523,
        -0.0062414902127982742742,
        -0.012580751999081999469,
        0.003335725285473771278,
    ),
    "db6": (
        0.11154074335010946362,
        0.49462389039845308568,
        0.75113390802109535068,
        0.31525035170919762909,
        -0.22626469396543982008,
        -0.12976686756726193556,
        0.097501605587323049102,
        0.027522865530305728626,
        -0.031582039317486029565,
        0.00055384220116149613925,
        0.0047772575109455106396,
        -0.0010773010853084795649,
    ),
    "db7": (
        0.07785205408500917902,
        0.39653931948191730654,
        0.72913209084623511992,
        0.46978228740519312247,
        -0.14390600392856497541,
        -0.22403618499387498264,
        0.071309219266830264751,
        0.080612609151083071913,
        -0.03802993693501441358,
        -0.016574541630666880654,
        0.012550998556099840613,
        0.00042957797292136652113,
        -0.0018016407040474909153,
        0.00035371379997452024845,
    ),
    "db8": (
        0.054415842243104009955,
        0.31287159091429997066,
        0.67563073629728980681,
        0.58535468365420671277,
        -0.015829105256349305667,
        -0.28401554296154692652,
        0.00047248457391328277036,
        0.12874742662047845886,
        -0.01736930100180754617,
        -0.044088253930794751507,
        0.013981027917398281649,
        0.0087460940474057767164,
        -0.0048703529934515743104,
        -0.0003917403733769470463,
        0.00067544940645056936637,
        -0.00011747678412476953373,
    ),
}

FAMILY_NAMES = tuple(_FILTERS)

# |entry| below this is treated as a structural zero of the matrix; true
# zeros of the cascade are exact or <= 1e-15 after rounding.
SUPPORT_EPS = 1e-12


@dataclass(frozen=True)
class WaveletFamily:
    """A wavelet family given by its orthonormal low-pass filter taps."""

    name: str
    filter: np.ndarray

    @property
    def vanishing_moments(self) -> int:
        return len(self.filter) // 2

    def highpass(self) -> np.ndarray:
        """Quadrature-mirror detail filter g[l] = (-1)^l h[L-1-l]."""
        h = self.filter
        L = len(h)
        return np.array([(-1.0) ** l * h[L - 1 - l] for l in range(L)])


def get_family(name: str) -> WaveletFamily:
    key = name.lower()
    if key == "db1":
        key = "haar"
    if key not in _FILTERS:
        raise KeyError(f"unknown wavelet family {name!r}; choose from {FAMILY_NAMES}")
    taps = np.array(_FILTERS[key], dtype=np.float64)
    taps.setflags(write=False)
    return WaveletFamily(key, taps)


@dataclass(frozen=True)
class TransformMatrix:
    """Explicit orthonormal transform with per-row dyadic addresses.

    ``index_map[i]`` is ``("approx", -1, 0)`` for the approximation row and
    ``("detail", j, k)`` for the detail row at level j (0 = coarsest,
    log2(n)-1 = finest) and position k in 0..2**j - 1.
    """

    family: WaveletFamily
    n: int
    rows: np.ndarray
    index_map: tuple[tuple[str, int, int], ...] = field(repr=False)

    @property
    def levels(self) -> int:
        return self.n.bit_length() - 1


@dataclass(frozen=True)
class CoefficientVector:
    """Wavelet coefficients sharing the dyadic addressing of their transform."""

    values: np.ndarray
    index_map: tuple[tuple[str, int, int], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.values)


def _analysis_pair(family: WaveletFamily, m: int) -> tuple[np.ndarray, np.ndarray]:
    """One-level periodized analysis: (m/2 x m) low-pass and high-pass blocks.

    Filters longer than m wrap circularly with accumulation, which keeps the
    stacked matrix exactly orthogonal for any even m.
    """
    h = family.filter
    g = family.highpass()
    half = m // 2
    lo = np.zeros((half, m))
    hi = np.zeros((half, m))
    for i in range(half):
        for l in range(len(h)):
            c = (2 * i + l) % m
            lo[i, c] += h[l]
            hi[i, c] += g[l]
    return lo, hi


def build_matrix(family: WaveletFamily, n: int, *, wrap: bool = True) -> TransformMatrix:
    """Construct the n x n orthonormal transform matrix for ``family``.

    Args:
        family: wavelet family (see :func:`get_family`).
        n: signal length, a power of two >= 2.
        wrap: permit filters longer than the signal to wrap circularly.
            With ``wrap=False`` a too-long filter raises
            :class:`FilterTooLongForSignal` instead.

    Row order is approximation first, then details coarse-to-fine, which for
    Haar reproduces the textbook matrix layout exactly.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise NonPowerOfTwo(f"transform length must be 2**k with k >= 1, got {n}")
    if not wrap and n < len(family.filter):
        raise FilterTooLongForSignal(
            f"{family.name} has {len(family.filter)} taps but the signal has length {n}"
        )

    approx = np.eye(n)  # rows of the running approximation basis
    details: list[np.ndarray] = []  # finest first
    m = n
    while m >= 2:
        lo, hi = _analysis_pair(family, m)
        details.append(hi @ approx)
        approx = lo @ approx
        m //= 2

    rows = np.vstack([approx] + details[::-1])
    index_map: list[tuple[str, int, int]] = [("approx", -1, 0)]
    for j in range(n.bit_length() - 1):
        index_map.extend(("detail", j, k) for k in range(2**j))
    rows.setflags(write=False)
    return TransformMatrix(family, n, rows, tuple(index_map))


@lru_cache(maxsize=None)
def cached_matrix(family_name: str, n: int) -> TransformMatrix:
    """Memoized :func:`build_matrix`; safe to share, the matrix is immutable."""
    return build_matrix(get_family(family_name), n)


def forward(W: TransformMatrix, y: np.ndarray) -> CoefficientVector:
    """Analysis transform W @ y with dyadic addressing."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (W.n,):
        raise LengthMismatch(f"expected signal of length {W.n}, got shape {y.shape}")
    return CoefficientVector(W.rows @ y, W.index_map)


def inverse(W: TransformMatrix, beta: CoefficientVector | np.ndarray) -> np.ndarray:
    """Synthesis transform W.T @ beta; exact inverse of :func:`forward`."""
    values = beta.values if isinstance(beta, CoefficientVector) else np.asarray(beta, dtype=np.float64)
    if values.shape != (W.n,):
        raise LengthMismatch(f"expected {W.n} coefficients, got shape {values.shape}")
    return W.rows.T @ values


def last_column_support(W: TransformMatrix) -> list[tuple[int, float]]:
    """Rows whose last-column entry is structurally nonzero, with |W[i, n-1]|.

    These are exactly the coefficients that enter the reconstruction of the
    newest sample; for Haar there are log2(n) + 1 of them.
    """
    col = W.rows[:, -1]
    return [(i, abs(col[i])) for i in range(W.n) if abs(col[i]) > SUPPORT_EPS]


def finest_level_coeffs(beta: CoefficientVector) -> np.ndarray:
    """Detail coefficients at the highest resolution (level log2(n) - 1)."""
    return np.asarray(beta.values[beta.n // 2 :])
