"""Arbitrary branch-count generalization of the transmitter analysis.

The two-branch closed forms all flow from matrix identities that never
use the branch count, so the M-branch versions are assembled from the
same pieces: a linearized coupling matrix, the Gaussian moment
identities, and per-branch error polynomials in the reference power.
Only the exact SE-optimal precoder stays two-branch specific (its
candidate enumeration grows combinatorially); the matched-filter
baselines generalize directly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoFiniteOptimumError, SingularCouplingError
from .montecarlo import SampleBatch, _as_rng, _covariance_factor, _pa_output, _solve_chunk
from .polyroots import unique_positive_root
from .precoding import ChannelSpec, PrecoderSolution, _conventional_mrt_engine, _da_mrt_engine, default_eta_grid

__all__ = [
    "HardwareConfigM",
    "SignalSpecM",
    "hardware_from_pair",
    "signal_from_pair",
    "build_q_m",
    "nmse_branches_m",
    "error_polynomials_m",
    "minmax_backoff_m",
    "mrt_variants_m",
    "simulate_batch_m",
    "empirical_nmse_m",
]


@dataclass(frozen=True)
class HardwareConfigM:
    """M-branch transmitter hardware.

    ``kappa[l, m]`` is the backward coupling from branch ``l`` into
    branch ``m``; the diagonal must be zero.
    """

    gamma: np.ndarray
    kappa: np.ndarray
    rho: np.ndarray
    sigma_w2: float

    def __post_init__(self):
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        kappa = np.asarray(self.kappa, dtype=complex)
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        m = gamma.size
        if kappa.shape != (m, m):
            raise ValueError("crosstalk matrix shape must match the gain count")
        if rho.shape != (m,):
            raise ValueError("need one compression coefficient per branch")
        if not np.all(gamma > 0):
            raise ValueError("branch gains must be positive")
        if np.any(np.abs(np.diag(kappa)) != 0):
            raise ValueError("crosstalk matrix must have a zero diagonal")
        if np.any(rho > 0):
            raise ValueError("compression coefficients must be <= 0")
        if not self.sigma_w2 > 0:
            raise ValueError("noise variance must be positive")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "rho", rho)

    @property
    def n_branches(self) -> int:
        return self.gamma.size

    @property
    def feedback_matrix(self) -> np.ndarray:
        return self.gamma[:, None] * self.kappa.T


@dataclass(frozen=True)
class SignalSpecM:
    """Input statistics: a unit-referenced covariance shape and a power.

    The shape's (1,1) entry is pinned to one so the reference power is
    literally the first branch's input power.
    """

    c_x_shape: np.ndarray
    p_x: float

    def __post_init__(self):
        s = np.asarray(self.c_x_shape, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("covariance shape must be square")
        scale = max(np.linalg.norm(s), 1.0)
        if np.linalg.norm(s - s.conj().T) > 1e-12 * scale:
            raise ValueError("covariance shape must be Hermitian")
        evals = np.linalg.eigvalsh(s)
        if evals.min() < -1e-12 * max(evals.max(), 1.0):
            raise ValueError("covariance shape must be positive semidefinite")
        if abs(s[0, 0] - 1.0) > 1e-12:
            raise ValueError("covariance shape must have a unit (1,1) entry")
        if self.p_x < 0:
            raise ValueError("reference power must be non-negative")
        object.__setattr__(self, "c_x_shape", s)

    def covariance(self, p_x: float | None = None) -> np.ndarray:
        p = self.p_x if p_x is None else p_x
        return p * self.c_x_shape


def hardware_from_pair(hw) -> HardwareConfigM:
    """Lift a two-branch hardware config into the M-branch container."""
    kappa = np.zeros((2, 2), dtype=complex)
    kappa[0, 1] = hw.kappa[0]
    kappa[1, 0] = hw.kappa[1]
    return HardwareConfigM(
        gamma=np.asarray(hw.gamma, dtype=float),
        kappa=kappa,
        rho=np.asarray(hw.rho, dtype=float),
        sigma_w2=hw.sigma_w2,
    )


def signal_from_pair(sig) -> SignalSpecM:
    return SignalSpecM(c_x_shape=sig.covariance_shape(), p_x=sig.p_x)


def build_q_m(hw: HardwareConfigM, exact: bool = False) -> np.ndarray:
    """Linearized coupling matrix for M branches.

    The default keeps the first order in the crosstalk, matching the
    two-branch analysis entry for entry.  ``exact=True`` instead inverts
    the linear feedback loop completely, which differs at second order.
    """
    l_mat = np.diag(hw.gamma)
    k = hw.feedback_matrix
    if not exact:
        return l_mat + k @ l_mat
    eye = np.eye(hw.n_branches)
    mat = eye - k
    cond_scale = np.linalg.norm(mat)
    if cond_scale == 0 or np.linalg.matrix_rank(mat) < hw.n_branches:
        raise SingularCouplingError("feedback loop matrix is singular")
    return np.linalg.solve(mat, l_mat)


def error_polynomials_m(hw: HardwareConfigM, spec: SignalSpecM, exact_q: bool = False):
    """Per-branch error-variance polynomial coefficients.

    Returns ``(cubic, quadratic, linear, denom)`` arrays so that branch
    ``l`` has error variance ``cubic[l] p^3 + quadratic[l] p^2 +
    linear[l] p + sigma_w2`` and NMSE ``error / (denom[l] p)``.
    """
    q = build_q_m(hw, exact=exact_q)
    l_mat = np.diag(hw.gamma)
    s = spec.c_x_shape
    rho = hw.rho

    t = q @ s @ q.conj().T
    t_diag = np.real(np.diag(t))
    resid = q - l_mat
    cross = np.diag(q @ s @ resid.conj().T)
    cubic = 6.0 * rho ** 2 * t_diag ** 3
    quadratic = 4.0 * np.real(rho * t_diag * cross)
    linear = np.real(np.diag(resid @ s @ resid.conj().T))
    denom = hw.gamma ** 2 * np.real(np.diag(s))
    return cubic, quadratic, linear, denom


def nmse_branches_m(
    hw: HardwareConfigM, spec: SignalSpecM, p_x: float | None = None, exact_q: bool = False
) -> np.ndarray:
    """Per-branch NMSE values at reference power ``p_x``.

    Branches with zero configured input power get an infinite NMSE.
    """
    p = spec.p_x if p_x is None else p_x
    cubic, quadratic, linear, denom = error_polynomials_m(hw, spec, exact_q=exact_q)
    err = cubic * p ** 3 + quadratic * p * p + linear * p + hw.sigma_w2
    out = np.full(hw.n_branches, np.inf)
    ok = denom * p > 0
    out[ok] = err[ok] / (denom[ok] * p)
    return out


def minmax_backoff_m(
    hw: HardwareConfigM, spec: SignalSpecM, rel_tol: float = 1e-13, exact_q: bool = False
) -> float:
    """Reference power minimizing the worst branch NMSE, any branch count.

    Each branch NMSE is convex in the power, so the worst-branch
    envelope is convex too and bisection on its one-sided slopes finds
    the global minimum.  The bracket comes from the per-branch
    minimizers: below the smallest every branch still improves with more
    power, above the largest every branch degrades.
    """
    if np.any(hw.rho == 0):
        raise NoFiniteOptimumError("all branches must be compressive for a finite optimum")
    cubic, quadratic, linear, denom = error_polynomials_m(hw, spec, exact_q=exact_q)
    active = denom > 0
    if not np.any(active):
        raise ValueError("no branch carries power")
    cubic, quadratic, denom = cubic[active], quadratic[active], denom[active]
    linear = linear[active]
    sw2 = hw.sigma_w2

    minimizers = np.array([
        unique_positive_root(np.array([2.0 * a, b, 0.0, -sw2]))
        for a, b in zip(cubic, quadratic)
    ])
    lo, hi = minimizers.min(), minimizers.max()
    if hi <= lo * (1.0 + 1e-15):
        return float(lo)

    def values_slopes(p):
        vals = (cubic * p ** 3 + quadratic * p * p + linear * p + sw2) / (denom * p)
        slopes = (2.0 * cubic * p + quadratic - sw2 / (p * p)) / denom
        return vals, slopes

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vals, slopes = values_slopes(mid)
        worst = vals.max()
        front = slopes[vals >= worst * (1.0 - 1e-12)]
        if front.min() > 0:
            hi = mid
        elif front.max() < 0:
            lo = mid
        else:
            return float(mid)
        if hi - lo <= rel_tol * hi:
            break
    return float(0.5 * (lo + hi))


def mrt_variants_m(
    channel: ChannelSpec, hw: HardwareConfigM, eta_grid=None, exact_q: bool = False
) -> dict[str, PrecoderSolution]:
    """Matched-filter baselines for an M-branch transmitter.

    Returns the conventional fixed-direction design and the
    distortion-aware line search, keyed ``"conventional"`` and
    ``"distortion_aware"``.
    """
    if channel.n_branches != hw.n_branches:
        raise ValueError("channel length must match the branch count")
    if not np.all(hw.rho < 0):
        raise ValueError("all branches must be strictly compressive")
    q = build_q_m(hw, exact=exact_q)
    h = channel.h
    if eta_grid is None:
        eta_grid = default_eta_grid(h, q, hw.rho)
    conventional = _conventional_mrt_engine(q, h, hw.rho, hw.sigma_w2, channel.sigma_n2)
    aware = _da_mrt_engine(q, h, hw.rho, hw.sigma_w2, channel.sigma_n2, np.asarray(eta_grid, dtype=float))
    return {"conventional": conventional, "distortion_aware": aware}


def simulate_batch_m(
    hw: HardwareConfigM, spec: SignalSpecM, n: int, seed, exact_q: bool = False
) -> SampleBatch:
    """Exact nonlinear feedback simulation for M branches.

    Same solver and randomness discipline as the two-branch batch; the
    linearized coupling matrix only seeds the iteration.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = _as_rng(seed)
    factor = _covariance_factor(spec.covariance())
    m = hw.n_branches
    z = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2.0)
    x = z @ factor.T
    q = build_q_m(hw, exact=exact_q)
    u, converged = _solve_chunk(x, hw.gamma, hw.feedback_matrix, hw.rho, q)
    r = _pa_output(u, hw.rho)
    w = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) * np.sqrt(
        hw.sigma_w2 / 2.0
    )
    return SampleBatch(x=x, u=u, r=r, y=r + w, seed=seed, converged=converged)


def empirical_nmse_m(batch: SampleBatch, hw: HardwareConfigM, spec: SignalSpecM) -> np.ndarray:
    """Sample NMSE per branch from an M-branch batch."""
    mask = batch.converged
    if not np.any(mask):
        raise ValueError("batch has no converged samples")
    err = batch.y[mask] - batch.x[mask] * hw.gamma
    power = hw.gamma ** 2 * np.real(np.diag(spec.c_x_shape)) * spec.p_x
    mean_err = np.mean(np.abs(err) ** 2, axis=0)
    out = np.full(hw.n_branches, np.inf)
    ok = power > 0
    out[ok] = mean_err[ok] / power[ok]
    return out
