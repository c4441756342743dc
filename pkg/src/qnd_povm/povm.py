"""Exact measurement operator for dispersive QND readout of a collective spin.

Two circularly polarized coherent beams (amplitudes gamma, chi) pick up
opposite spin-dependent phases e^{-+ i gt m_z / 2}, interfere on a waveplate,
and are counted in the two output ports.  Detecting (n_c, n_d) photons leaves
the atoms acted on by an operator diagonal in |J, m_z>, whose eigenvalue at
each m_z this module evaluates in two independent ways:

* a spectral form: a non-negative envelope A(m_z) built from the two bases
  1 +- cos(2 eta) cos(2 phi(m_z)) in log space, times detector phases
  e^{i(n_c phi_c + n_d phi_d)} and an outcome-dependent constant phase;
* a direct form: the photon-count powers of the two interfered coherent
  amplitudes, evaluated in log-polar complex arithmetic.

The two routes must agree to float precision; the direct form serves as the
internal oracle that pins the phase conventions of the spectral form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, PreconditionError, ResourceCapError
from .numerics import HalfInt, log_factorial, log_factorial_array
from .spin_state import CollectiveState, Sector

_TWO_PI = 2.0 * math.pi
# sentinel for log(0) that survives multiplication by small integer counts
_LOG_ZERO = -1e9


def _wrap_pi(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    y = (-x + math.pi) % _TWO_PI - math.pi
    return -y


@dataclass(frozen=True)
class QndParams:
    """Light amplitudes and interaction phase of one QND measurement.

    gamma and chi are the coherent amplitudes of the two polarization modes,
    gt the dimensionless interaction phase.  The derived asymmetry eta obeys
    tan(eta) = (|chi| - |gamma|)/(|chi| + |gamma|) and the relative light
    phase phi_chigamma = arg(chi) - arg(gamma), reduced to (-pi, pi].
    """

    gamma: complex
    chi: complex
    gt: float

    def __post_init__(self):
        g = complex(self.gamma)
        c = complex(self.chi)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)
                and math.isfinite(c.real) and math.isfinite(c.imag)
                and math.isfinite(self.gt)):
            raise DomainError("non-finite measurement parameters")
        if abs(g) == 0.0 or abs(c) == 0.0:
            raise DomainError("both light amplitudes must be nonzero")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "chi", c)
        object.__setattr__(self, "gt", float(self.gt))

    @property
    def abs_gamma(self) -> float:
        return abs(self.gamma)

    @property
    def abs_chi(self) -> float:
        return abs(self.chi)

    @property
    def photon_mean(self) -> float:
        """Mean total photon number |gamma|^2 + |chi|^2."""
        return self.abs_gamma**2 + self.abs_chi**2

    @property
    def eta(self) -> float:
        return math.atan(
            (self.abs_chi - self.abs_gamma) / (self.abs_chi + self.abs_gamma)
        )

    @property
    def phi_chigamma(self) -> float:
        return _wrap_pi(cmath.phase(self.chi) - cmath.phase(self.gamma))

    @property
    def cos_2eta(self) -> float:
        # algebraically 2|gamma||chi| / (|gamma|^2 + |chi|^2)
        return 2.0 * self.abs_gamma * self.abs_chi / self.photon_mean


@dataclass(frozen=True)
class PhotonOutcome:
    """Photon counts registered by the two detectors."""

    n_c: int
    n_d: int

    def __post_init__(self):
        if self.n_c < 0 or self.n_d < 0:
            raise DomainError("photon counts must be non-negative")
        object.__setattr__(self, "n_c", int(self.n_c))
        object.__setattr__(self, "n_d", int(self.n_d))

    @property
    def total(self) -> int:
        return self.n_c + self.n_d

    @property
    def u(self) -> float:
        return (self.n_d + self.n_c) / 2.0

    @property
    def v(self) -> float:
        return (self.n_d - self.n_c) / 2.0

    @property
    def r(self) -> float:
        """Normalized count difference (n_d - n_c)/(n_c + n_d)."""
        if self.total == 0:
            raise DomainError("r is undefined for the zero-photon outcome")
        return (self.n_d - self.n_c) / self.total


@dataclass
class OutcomeDistribution:
    """Enumerated outcome probabilities over a total-photon window."""

    entries: tuple
    cutoff_total: int
    captured_mass: float

    @cached_property
    def _cumulative(self) -> np.ndarray:
        return np.cumsum(np.array([p for _, p in self.entries]))

    def mean_total(self) -> float:
        """Mean of n_c + n_d under the (renormalized) captured mass."""
        tot = np.array([o.total for o, _ in self.entries], dtype=float)
        p = np.array([p for _, p in self.entries])
        return float(np.dot(tot, p) / self.captured_mass)


# ---------------------------------------------------------------------------
# phases and amplitude envelope
# ---------------------------------------------------------------------------

def _as_m(m_z) -> float:
    """Spin projection as a float; HalfInt, int and real values all pass.

    The envelope and phase formulas are smooth functions of m, evaluated off
    the physical lattice too (peak positions, finite differences).
    """
    if isinstance(m_z, HalfInt):
        return m_z.value
    try:
        return float(m_z)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"cannot interpret {m_z!r} as a spin projection") from exc


def phase_phi(params: QndParams, m_z) -> float:
    """Interference phase phi(m_z) = gt m_z / 2 + phi_chigamma / 2 + pi / 4."""
    return params.gt * _as_m(m_z) / 2.0 + params.phi_chigamma / 2.0 + math.pi / 4.0


def detector_phases(params: QndParams, m_z) -> tuple[float, float]:
    """Per-count phases (phi_c, phi_d) imprinted by each detected photon.

    These are arctan(tan(eta) tan(phi)) and arctan(cot(eta) tan(phi)) - pi/2
    on the principal branch, continued across the branch points of tan(phi)
    through atan2 so that e^{i n phi} stays continuous in m_z.  The branch
    content is physical: it carries the sign flips of the underlying
    interfered amplitudes, and is validated against the direct product form.
    """
    phic, phid = _phase_arrays(params, np.array([_as_m(m_z)]))
    return float(phic[0]), float(phid[0])


def _phase_arrays(params: QndParams, m: np.ndarray):
    m = np.asarray(m, dtype=float)
    phi = params.gt * m / 2.0 + params.phi_chigamma / 2.0 + math.pi / 4.0
    ag, ac = params.abs_gamma, params.abs_chi
    sp, cp = np.sin(phi), np.cos(phi)
    phi_c = np.arctan2((ac - ag) * sp, (ac + ag) * cp)
    phi_d = np.arctan2(-(ag + ac) * sp, (ag - ac) * cp) - math.pi / 2.0
    if params.eta > 0.0:
        phi_d = phi_d + math.pi
    # reduce to (-pi, pi]; only e^{i n phi} with integer n is ever used
    phi_d = math.pi - np.mod(math.pi - phi_d, _TWO_PI)
    return phi_c, phi_d


def _log_bases(params: QndParams, m: np.ndarray):
    """log of the envelope bases 1 +- cos(2 eta) cos(2 phi(m_z)).

    Each base equals ||gamma| -+ |chi| e^{2 i phi}|^2 / (|gamma|^2+|chi|^2),
    a sum of squares, which stays accurate where the base nearly vanishes.
    Exact zeros map to a large negative sentinel (0^0 := 1 is handled by the
    count multiplying the log).
    """
    m = np.asarray(m, dtype=float)
    beta = params.gt * m + params.phi_chigamma
    ag, ac = params.abs_gamma, params.abs_chi
    sb, cb = np.sin(beta), np.cos(beta)
    s = params.photon_mean
    base_c = ((ag - ac * sb) ** 2 + (ac * cb) ** 2) / s
    base_d = ((ag + ac * sb) ** 2 + (ac * cb) ** 2) / s
    with np.errstate(divide="ignore"):
        log_c = np.where(base_c > 0.0, np.log(np.maximum(base_c, 1e-320)), _LOG_ZERO)
        log_d = np.where(base_d > 0.0, np.log(np.maximum(base_d, 1e-320)), _LOG_ZERO)
    return log_c, log_d


def log_amplitude(params: QndParams, outcome: PhotonOutcome, m_z) -> float:
    """ln A(m_z) of the non-negative amplitude envelope; -inf at exact zeros."""
    lc, ld = _log_bases(params, np.array([_as_m(m_z)]))
    val = (
        0.5 * outcome.n_c * lc[0]
        + 0.5 * outcome.n_d * ld[0]
        - 0.5 * (log_factorial(outcome.n_c) + log_factorial(outcome.n_d))
    )
    return -math.inf if val < _LOG_ZERO / 2 else float(val)


def amplitude(params: QndParams, outcome: PhotonOutcome, m_z) -> float:
    """Amplitude envelope A(m_z) >= 0 the measurement imprints on m_z."""
    la = log_amplitude(params, outcome, m_z)
    return 0.0 if la == -math.inf else math.exp(la)


def _global_phase(params: QndParams, outcome: PhotonOutcome) -> float:
    """m_z-independent phase making the spectral form equal the direct one."""
    lam = outcome.total * (
        cmath.phase(params.gamma) + params.phi_chigamma / 2.0 + math.pi / 4.0
    )
    if params.eta <= 0.0:
        lam += outcome.n_d * math.pi
    return lam


def _log_magnitude_arrays(params: QndParams, outcome: PhotonOutcome,
                          m: np.ndarray) -> np.ndarray:
    lc, ld = _log_bases(params, m)
    s = params.photon_mean
    return (
        -s / 2.0
        + 0.5 * outcome.total * math.log(s / 2.0)
        + 0.5 * outcome.n_c * lc
        + 0.5 * outcome.n_d * ld
        - 0.5 * (log_factorial(outcome.n_c) + log_factorial(outcome.n_d))
    )


def log_matrix_element(params: QndParams, outcome: PhotonOutcome, m_z):
    """(log magnitude, phase) of <J m_z|M|J m_z> via the spectral form."""
    mv = np.array([_as_m(m_z)])
    logmag = _log_magnitude_arrays(params, outcome, mv)[0]
    pc, pd = _phase_arrays(params, mv)
    phase = outcome.n_c * pc[0] + outcome.n_d * pd[0] + _global_phase(params, outcome)
    if logmag < _LOG_ZERO / 4:
        return -math.inf, 0.0
    return float(logmag), _wrap_pi(float(phase))


def log_matrix_element_direct(params: QndParams, outcome: PhotonOutcome, m_z):
    """(log magnitude, phase) of the same eigenvalue from first principles.

    Evaluates the photon-count powers of the interfered coherent amplitudes
        alpha_c = (gamma e^{-i gt m/2} + i chi e^{+i gt m/2}) / sqrt(2)
        alpha_d = (i gamma e^{-i gt m/2} + chi e^{+i gt m/2}) / sqrt(2)
    in log-polar form.  Kept free of the spectral machinery on purpose: it is
    the oracle the spectral phase conventions are checked against.
    """
    m = _as_m(m_z)
    rot = cmath.exp(-0.5j * params.gt * m)
    a_c = (params.gamma * rot + 1j * params.chi / rot) / math.sqrt(2.0)
    a_d = (1j * params.gamma * rot + params.chi / rot) / math.sqrt(2.0)
    logmag = -params.photon_mean / 2.0 - 0.5 * (
        log_factorial(outcome.n_c) + log_factorial(outcome.n_d)
    )
    phase = 0.0
    for a, n in ((a_c, outcome.n_c), (a_d, outcome.n_d)):
        if n == 0:
            continue
        if abs(a) == 0.0:
            return -math.inf, 0.0
        logmag += n * math.log(abs(a))
        phase += n * cmath.phase(a)
    return float(logmag), _wrap_pi(phase)


# ---------------------------------------------------------------------------
# operator action and outcome statistics
# ---------------------------------------------------------------------------

def apply(params: QndParams, outcome: PhotonOutcome,
          state: CollectiveState) -> CollectiveState:
    """Act with the measurement operator; returns the unnormalized state.

    Diagonal in (J, m_z): every amplitude is multiplied by the full
    eigenvalue including the absolute prefactor, so the squared norm of the
    result is exactly the outcome probability of a normalized input.
    """
    new_secs = []
    for sec in state.sectors:
        mv = sec.m_values()
        logmag = _log_magnitude_arrays(params, outcome, mv)
        pc, pd = _phase_arrays(params, mv)
        phase = outcome.n_c * pc + outcome.n_d * pd + _global_phase(params, outcome)
        factor = np.exp(logmag) * np.exp(1j * phase)
        new_secs.append(Sector(sec.two_j, sec.amps * factor))
    out = CollectiveState(tuple(new_secs), norm_hint=1.0)
    object.__setattr__(out, "norm_hint", out.squared_norm())
    return out


def outcome_probability(params: QndParams, outcome: PhotonOutcome,
                        state: CollectiveState) -> float:
    """Probability of detecting (n_c, n_d) on a normalized state."""
    if not state.is_normalized():
        raise PreconditionError("outcome_probability needs a normalized state")
    shift = None
    acc = 0.0
    pieces = []
    for sec in state.sectors:
        w = np.abs(sec.amps) ** 2
        logmag = _log_magnitude_arrays(params, outcome, sec.m_values())
        pieces.append((w, logmag))
        top = np.max(logmag) if logmag.size else -math.inf
        shift = top if shift is None else max(shift, top)
    if shift is None or shift == -math.inf:
        return 0.0
    for w, logmag in pieces:
        acc += float(np.dot(w, np.exp(2.0 * (logmag - shift))))
    return math.exp(2.0 * shift) * acc


def posterior(params: QndParams, outcome: PhotonOutcome,
              state: CollectiveState) -> CollectiveState:
    """Normalized post-measurement state.

    The per-m_z detector phases are retained; only the overall scale is
    divided out.  Internally shifts by the peak log magnitude so that
    outcomes deep in the tail still normalize cleanly.
    """
    if not state.is_normalized():
        raise PreconditionError("posterior needs a normalized state")
    scaled = []
    shift = -math.inf
    for sec in state.sectors:
        logmag = _log_magnitude_arrays(params, outcome, sec.m_values())
        occupied = np.abs(sec.amps) > 0.0
        if np.any(occupied):
            shift = max(shift, float(np.max(logmag[occupied])))
        scaled.append(logmag)
    if shift == -math.inf:
        raise DomainError("zero-probability outcome has no posterior")
    secs = []
    for sec, logmag in zip(state.sectors, scaled):
        pc, pd = _phase_arrays(params, sec.m_values())
        phase = outcome.n_c * pc + outcome.n_d * pd + _global_phase(params, outcome)
        factor = np.exp(logmag - shift) * np.exp(1j * phase)
        secs.append(Sector(sec.two_j, sec.amps * factor))
    tmp = CollectiveState(tuple(secs), norm_hint=1.0)
    n2 = tmp.squared_norm()
    if n2 == 0.0:
        raise DomainError("zero-probability outcome has no posterior")
    scale = 1.0 / math.sqrt(n2)
    return CollectiveState(
        tuple(Sector(s.two_j, s.amps * scale) for s in secs), norm_hint=1.0
    )


def outcome_distribution(params: QndParams, state: CollectiveState,
                         mass_tolerance: float,
                         max_total: int | None = None) -> OutcomeDistribution:
    """Enumerate outcome probabilities until the requested mass is captured.

    Walks total photon number over a window centered on the Poissonian mean
    |gamma|^2 + |chi|^2 with half-width k sqrt(mean), growing k until the
    captured mass reaches 1 - mass_tolerance.  Entries come back ordered by
    ascending total, then ascending n_c.  A window that would have to grow
    past the hard cap raises ResourceCapError carrying the partial mass.
    """
    if not state.is_normalized():
        raise PreconditionError("outcome_distribution needs a normalized state")
    if not (0.0 < mass_tolerance < 1.0):
        raise DomainError("mass_tolerance must lie strictly between 0 and 1")
    s = params.photon_mean
    cap = int(max_total) if max_total is not None else int(4.0 * s + 100.0)
    sigma_p = math.sqrt(s)

    m_all = np.concatenate([sec.m_values() for sec in state.sectors])
    weights = np.concatenate([np.abs(sec.amps) ** 2 for sec in state.sectors])
    lc, ld = _log_bases(params, m_all)

    rows: dict[int, np.ndarray] = {}
    lf = log_factorial_array(cap + 1)

    def row(total: int) -> np.ndarray:
        got = rows.get(total)
        if got is not None:
            return got
        ncs = np.arange(total + 1)
        const = -s + total * math.log(s / 2.0)
        x = (
            ncs[:, None] * lc[None, :]
            + (total - ncs)[:, None] * ld[None, :]
            - (lf[ncs] + lf[total - ncs])[:, None]
            + const
        )
        with np.errstate(under="ignore"):
            p = np.exp(x) @ weights
        rows[total] = p
        return p

    k = 4.0
    while True:
        lo = max(0, math.ceil(s - k * sigma_p))
        hi = math.floor(s + k * sigma_p)
        if hi > cap:
            mass = sum(float(np.sum(row(t))) for t in range(lo, cap + 1))
            raise ResourceCapError(
                f"photon window exceeded the cap of {cap} total photons",
                captured_mass=mass,
            )
        mass = 0.0
        for t in range(lo, hi + 1):
            mass += float(np.sum(row(t)))
        if mass >= 1.0 - mass_tolerance:
            break
        k += 1.0

    entries = []
    for t in range(lo, hi + 1):
        p = rows[t]
        for nc in range(t + 1):
            entries.append((PhotonOutcome(nc, t - nc), float(p[nc])))
    return OutcomeDistribution(entries=tuple(entries), cutoff_total=hi,
                               captured_mass=mass)


def sample_outcome(dist: OutcomeDistribution, seed: int) -> PhotonOutcome:
    """Inverse-CDF draw from the captured entries, renormalized.

    Uses numpy's PCG64 generator keyed by the seed, so a given
    (distribution, seed) pair yields the same outcome on every platform.
    """
    if dist.captured_mass <= 0.0 or not dist.entries:
        raise DomainError("cannot sample from an empty distribution")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    target = rng.random() * dist.captured_mass
    idx = int(np.searchsorted(dist._cumulative, target, side="right"))
    idx = min(idx, len(dist.entries) - 1)
    # a draw landing exactly on a CDF boundary could select a zero-mass
    # entry; step to the nearest entry that actually carries probability
    while idx > 0 and dist.entries[idx][1] == 0.0:
        idx -= 1
    if dist.entries[idx][1] == 0.0:
        raise DomainError("distribution carries no probability mass")
    return dist.entries[idx][0]


def params_to_json(params: QndParams) -> dict:
    return {
        "gamma": [params.gamma.real, params.gamma.imag],
        "chi": [params.chi.real, params.chi.imag],
        "gt": params.gt,
    }


def params_from_json(data: dict) -> QndParams:
    try:
        g = data["gamma"]
        c = data["chi"]
        gamma = complex(g[0], g[1]) if isinstance(g, (list, tuple)) else complex(g)
        chi = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return QndParams(gamma=gamma, chi=chi, gt=float(data["gt"]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DomainError(f"malformed params record: {exc}") from exc
