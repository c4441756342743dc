"""Numerically stable special functions used throughout the library.

Everything factorial-shaped is handled in log space: photon counts and
angular momenta get large enough (counts of order 10^2..10^4, spins to
J ~ 50..100) that direct factorials overflow long before the physically
meaningful combinations do.  Quantum numbers are carried as doubled
integers so half-integer spins and their selection rules stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# log(n!) exact to one ulp for the table range; lgamma beyond.
_LOGFACT_EXACT_MAX = 256
_LOGFACT_TABLE = np.empty(_LOGFACT_EXACT_MAX + 1)
_f = 1
for _n in range(_LOGFACT_EXACT_MAX + 1):
    if _n > 0:
        _f *= _n
    _LOGFACT_TABLE[_n] = math.log(_f) if _n > 0 else 0.0
del _f, _n


@dataclass(frozen=True, order=True)
class HalfInt:
    """Exact half-integer quantum number, stored as twice its value.

    J, m_z, L, M live on a half-integer lattice; storing ``twice`` keeps
    selection rules (parity, triangle conditions) free of float equality.
    """

    twice: int

    @staticmethod
    def coerce(x) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, (int, np.integer)):
            return HalfInt(2 * int(x))
        if isinstance(x, (float, np.floating)):
            t = round(2.0 * float(x))
            if abs(2.0 * float(x) - t) > 1e-9:
                raise DomainError(f"{x!r} is not a half-integer")
            return HalfInt(int(t))
        raise DomainError(f"cannot interpret {x!r} as a half-integer")

    @property
    def value(self) -> float:
        return self.twice / 2.0

    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.coerce(other).twice)

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.coerce(other).twice)

    def __str__(self) -> str:
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"


def log_factorial(n: int) -> float:
    """Natural log of n!.

    Exact (table of big-integer factorials) up to n=256, log-gamma beyond.
    Total on n >= 0.
    """
    if n < 0:
        raise DomainError("factorial of a negative integer")
    n = int(n)
    if n <= _LOGFACT_EXACT_MAX:
        return float(_LOGFACT_TABLE[n])
    return math.lgamma(n + 1.0)


def log_factorial_array(nmax: int) -> np.ndarray:
    """log(k!) for k = 0..nmax as a float array."""
    if nmax <= _LOGFACT_EXACT_MAX:
        return _LOGFACT_TABLE[: nmax + 1].copy()
    out = np.empty(nmax + 1)
    out[: _LOGFACT_EXACT_MAX + 1] = _LOGFACT_TABLE
    for k in range(_LOGFACT_EXACT_MAX + 1, nmax + 1):
        out[k] = math.lgamma(k + 1.0)
    return out


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k); -inf for k outside [0, n] (the zero-probability sentinel)."""
    if n < 0:
        raise DomainError("binomial with negative row index")
    if k < 0 or k > n:
        return -math.inf
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients
# ---------------------------------------------------------------------------

def _triangle_ok(tj1: int, tj2: int, tL: int) -> bool:
    return abs(tj1 - tj2) <= tL <= tj1 + tj2 and (tj1 + tj2 + tL) % 2 == 0


def clebsch_gordan(j1, m1, j2, m2, L, M) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | L M>.

    Evaluated through the Racah closed-form sum with log-magnitudes and an
    explicit alternating-sign accumulation, which stays usable out to
    j of order 50 (needed for sphere quasi-probability expansions of
    hundred-atom ensembles).  Returns 0 when M != m1 + m2 or the triangle
    rule fails; raises when the quantum numbers are not a valid set.
    """
    tj1, tm1 = HalfInt.coerce(j1).twice, HalfInt.coerce(m1).twice
    tj2, tm2 = HalfInt.coerce(j2).twice, HalfInt.coerce(m2).twice
    tL, tM = HalfInt.coerce(L).twice, HalfInt.coerce(M).twice
    for tj, tm, name in ((tj1, tm1, "j1"), (tj2, tm2, "j2"), (tL, tM, "L")):
        if tj < 0:
            raise DomainError(f"negative angular momentum {name}")
        if (tj - tm) % 2 != 0:
            raise DomainError(f"m of {name} has wrong parity")
        if abs(tm) > tj:
            raise DomainError(f"|m| exceeds {name}")
    if tm1 + tm2 != tM:
        return 0.0
    if not _triangle_ok(tj1, tj2, tL):
        return 0.0
    out = _cg_kernel(tj1, np.array([tm1]), tj2, np.array([tm2]), tL)
    return float(out[0])


def _cg_kernel(tj1: int, tm1: np.ndarray, tj2: int, tm2: np.ndarray, tL: int) -> np.ndarray:
    """Vector Racah sum over aligned (m1, m2) arrays with m1 + m2 = M fixed
    per element.  All inputs are doubled integers; triangle rule assumed."""
    tM = tm1 + tm2
    # every factorial argument below is an exact integer (doubled/2)
    def f2(x):  # log((x/2)!) for even doubled integer x >= 0
        return lf[x >> 1]

    big = (tj1 + tj2 + tL) // 2 + 1
    lf = log_factorial_array(big + 1)

    log_pref = 0.5 * (
        math.log(tL + 1.0)
        + lf[(tj1 + tj2 - tL) >> 1]
        + lf[(tj1 - tj2 + tL) >> 1]
        + lf[(-tj1 + tj2 + tL) >> 1]
        - lf[(tj1 + tj2 + tL) // 2 + 1]
        + f2(tj1 + tm1) + f2(tj1 - tm1)
        + f2(tj2 + tm2) + f2(tj2 - tm2)
        + f2(tL + tM) + f2(tL - tM)
    )

    # summation index k runs over all values keeping factorial args >= 0;
    # evaluated on a shared k grid with per-element masking so the whole
    # (m1, m2) batch vectorizes
    k_lo = np.maximum(0, np.maximum(tj2 - tL - tm1, tj1 + tm2 - tL) // 2)
    k_hi = np.minimum(
        (tj1 + tj2 - tL) // 2,
        np.minimum((tj1 - tm1) >> 1, (tj2 + tm2) >> 1),
    )
    out = np.zeros(tm1.shape)
    if np.all(k_lo > k_hi):
        return out
    ks = np.arange(max(0, int(k_lo.min())), int(k_hi.max()) + 1)
    valid = (ks[None, :] >= k_lo[:, None]) & (ks[None, :] <= k_hi[:, None])

    # factorial arguments, clipped at 0 where the mask already excludes them
    a1 = (tj1 + tj2 - tL) // 2 - ks
    a2 = ((tj1 - tm1) >> 1)[:, None] - ks[None, :]
    a3 = ((tj2 + tm2) >> 1)[:, None] - ks[None, :]
    a4 = ((tL - tj2 + tm1) >> 1)[:, None] + ks[None, :]
    a5 = ((tL - tj1 - tm2) >> 1)[:, None] + ks[None, :]
    terms = -(
        lf[ks][None, :]
        + lf[np.maximum(a1, 0)][None, :]
        + lf[np.maximum(a2, 0)]
        + lf[np.maximum(a3, 0)]
        + lf[np.maximum(a4, 0)]
        + lf[np.maximum(a5, 0)]
    )
    terms = np.where(valid, terms, -np.inf)
    peak = terms.max(axis=1)
    nonempty = peak > -np.inf
    shift = np.where(nonempty, peak, 0.0)
    with np.errstate(under="ignore"):
        signs = np.where(ks % 2 == 0, 1.0, -1.0)
        s = np.sum(signs[None, :] * np.exp(terms - shift[:, None]), axis=1)
    live = nonempty & (s != 0.0)
    out[live] = np.sign(s[live]) * np.exp(
        log_pref[live] + shift[live] + np.log(np.abs(s[live]))
    )
    return out


def clebsch_gordan_row(j, L, M, two_m_values: np.ndarray) -> np.ndarray:
    """<j m; j, M-m | L M> for every doubled m in ``two_m_values``.

    Vector form used by the multipole expansion; entries whose partner
    projection falls outside the sector come back as 0.
    """
    tj = HalfInt.coerce(j).twice
    tL, tM = HalfInt.coerce(L).twice, HalfInt.coerce(M).twice
    if not _triangle_ok(tj, tj, tL):
        return np.zeros(len(two_m_values))
    tm1 = np.asarray(two_m_values, dtype=int)
    tm2 = tM - tm1
    ok = (np.abs(tm1) <= tj) & (np.abs(tm2) <= tj) & (abs(tM) <= tL)
    out = np.zeros(tm1.shape)
    if np.any(ok):
        out[ok] = _cg_kernel(tj, tm1[ok], tj, tm2[ok], tL)
    return out


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def legendre_norm_table(lmax: int, m: int, x: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre values, rows L = m..lmax.

    Row L holds sqrt((2L+1)/(4 pi) (L-m)!/(L+m)!) P_L^m(x) with the
    Condon-Shortley sign, computed by the standard three-term upward
    recurrence, which is stable for the L range used here.  Requires m >= 0.
    """
    if m < 0:
        raise DomainError("legendre_norm_table needs m >= 0")
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    rows = np.zeros((max(0, lmax - m + 1),) + x.shape)
    if lmax < m:
        return rows
    # seed: sectoral term P~_m^m
    pmm = np.full(x.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, m + 1):
        pmm = -math.sqrt((2 * k + 1) / (2.0 * k)) * s * pmm
    rows[0] = pmm
    if lmax == m:
        return rows
    rows[1] = math.sqrt(2 * m + 3.0) * x * pmm
    for L in range(m + 2, lmax + 1):
        a = math.sqrt((4.0 * L * L - 1.0) / (L * L - m * m))
        b = math.sqrt(
            (2.0 * L + 1.0)
            * (L - 1.0 + m)
            * (L - 1.0 - m)
            / ((2.0 * L - 3.0) * (L * L - m * m))
        )
        rows[L - m] = a * x * rows[L - m - 1] - b * rows[L - m - 2]
    return rows


def spherical_harmonic(L: int, M: int, theta, phi):
    """Orthonormal Y_LM(theta, phi) with the Condon-Shortley phase.

    Accepts scalars or broadcastable arrays for the angles.
    """
    L, M = int(L), int(M)
    if L < 0 or abs(M) > L:
        raise DomainError("need L >= 0 and |M| <= L")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(M)
    p = legendre_norm_table(L, am, np.cos(theta))[-1]
    y = p * np.exp(1j * am * phi)
    if M < 0:
        y = np.conj(y) * ((-1) ** am)
    if y.ndim == 0:
        return complex(y)
    return y
