"""Closed-form transmit error statistics and the min-max power back-off.

The error of branch ``l`` is the gap between the actual (noisy,
compressed, crosstalk-coupled) branch output and the ideal linear output
``gamma_l x_l``.  Under the linearized Gaussian model its variance is a
cubic polynomial in the reference power, so the normalized error (NMSE)
is strictly convex in power and the worst branch admits an exact
min-max minimizer built from polynomial roots.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoFiniteOptimumError
from .model import HardwareConfig, SignalSpec
from .polyroots import real_roots, unique_positive_root
from .units import linear_to_db

__all__ = [
    "ErrorTerms",
    "NmseReport",
    "BackoffSolution",
    "error_covariance_diag",
    "nmse_branches",
    "nmse_second_derivative",
    "approx_nmse1",
    "siso_optimal_power",
    "minmax_backoff",
]

# Relative tolerance for accepting a balanced candidate: both branch
# NMSEs must agree this closely at the root or the root is discarded.
_BALANCE_TOL = 1e-6


@dataclass(frozen=True)
class ErrorTerms:
    """Power decomposition of one branch error variance in watt.

    ``cubic`` collects the self-distortion, ``quadratic`` the mixed
    distortion/crosstalk beat, ``linear`` the pure crosstalk leakage and
    ``noise`` the thermal floor.
    """

    cubic: float
    quadratic: float
    linear: float
    noise: float

    @property
    def total(self) -> float:
        return self.cubic + self.quadratic + self.linear + self.noise


@dataclass(frozen=True)
class NmseReport:
    """Both branch NMSEs at one reference power, with term breakdown."""

    p_x: float
    nmse1: float
    nmse2: float
    e11: float
    e22: float
    terms1: ErrorTerms
    terms2: ErrorTerms

    @property
    def nmse1_db(self) -> float:
        return float(linear_to_db(self.nmse1))

    @property
    def nmse2_db(self) -> float:
        return float(linear_to_db(self.nmse2))

    @property
    def worst(self) -> float:
        return max(self.nmse1, self.nmse2)


def _branch_polynomials(hw: HardwareConfig, sig: SignalSpec):
    """Cubic error-variance coefficients and NMSE denominators per branch.

    Returns ``(coeffs, denom)`` where ``coeffs[l] = (c3, c2, c1)`` so
    that ``e_l = c3 p^3 + c2 p^2 + c1 p + sigma_w2`` and the branch NMSE
    is ``e_l / (denom[l] * p)``.
    """
    g1, g2 = hw.gamma
    k1, k2 = hw.kappa
    r1, r2 = hw.rho
    b = sig.beta
    xi = complex(sig.xi)

    t11 = g1 * g1 * (1.0 + 2.0 * g2 * b * (np.conj(k2) * xi).real + g2 * g2 * abs(k2) ** 2 * b * b)
    t22 = g2 * g2 * (b * b + 2.0 * g1 * b * (k1 * xi).real + g1 * g1 * abs(k1) ** 2)

    c3_1 = 6.0 * r1 * r1 * t11 ** 3
    c2_1 = 4.0 * g1 * g1 * g2 * t11 * r1 * (g2 * b * b * abs(k2) ** 2 + b * (k2 * np.conj(xi)).real)
    c1_1 = b * b * g1 * g1 * g2 * g2 * abs(k2) ** 2

    c3_2 = 6.0 * r2 * r2 * t22 ** 3
    c2_2 = 4.0 * g1 * g2 * g2 * t22 * r2 * (g1 * abs(k1) ** 2 + b * (k1 * xi).real)
    c1_2 = g1 * g1 * g2 * g2 * abs(k1) ** 2

    coeffs = ((c3_1, c2_1, c1_1), (c3_2, c2_2, c1_2))
    denom = (g1 * g1, g2 * g2 * b * b)
    return coeffs, denom


def _terms(coeffs, sigma_w2: float, p: float) -> ErrorTerms:
    c3, c2, c1 = coeffs
    return ErrorTerms(cubic=c3 * p ** 3, quadratic=c2 * p * p, linear=c1 * p, noise=sigma_w2)


def error_covariance_diag(
    hw: HardwareConfig, sig: SignalSpec, p_x: float | None = None
) -> tuple[float, float]:
    """Per-branch error variances ``(e11, e22)`` in watt."""
    p = sig.p_x if p_x is None else p_x
    coeffs, _ = _branch_polynomials(hw, sig)
    return (_terms(coeffs[0], hw.sigma_w2, p).total, _terms(coeffs[1], hw.sigma_w2, p).total)


def nmse_branches(hw: HardwareConfig, sig: SignalSpec, p_x: float | None = None) -> NmseReport:
    """Both branch NMSEs at reference power ``p_x``.

    A zero reference power (or a zero branch power through ``beta = 0``)
    yields an infinite NMSE rather than an error: the ideal output
    vanishes while thermal noise does not.
    """
    p = sig.p_x if p_x is None else p_x
    coeffs, denom = _branch_polynomials(hw, sig)
    t1 = _terms(coeffs[0], hw.sigma_w2, p)
    t2 = _terms(coeffs[1], hw.sigma_w2, p)
    n1 = t1.total / (denom[0] * p) if denom[0] * p > 0 else np.inf
    n2 = t2.total / (denom[1] * p) if denom[1] * p > 0 else np.inf
    return NmseReport(p_x=p, nmse1=n1, nmse2=n2, e11=t1.total, e22=t2.total, terms1=t1, terms2=t2)


def nmse_second_derivative(
    hw: HardwareConfig, sig: SignalSpec, p_x: float | None = None
) -> tuple[float, float]:
    """Second derivatives of both NMSEs w.r.t. the reference power.

    Both are positive for any admissible parameters, which is what makes
    the min-max back-off problem well posed.
    """
    p = sig.p_x if p_x is None else p_x
    if p <= 0:
        raise ValueError("second derivative needs a positive reference power")
    coeffs, denom = _branch_polynomials(hw, sig)
    out = []
    for (c3, _, _), g in zip(coeffs, denom):
        if g == 0:
            out.append(np.inf)
        else:
            out.append(2.0 * c3 / g + 2.0 * hw.sigma_w2 / (g * p ** 3))
    return tuple(out)


def approx_nmse1(hw: HardwareConfig, sig: SignalSpec, p_x: float | None = None) -> float:
    """Leading-order branch 1 NMSE, valid for very weak crosstalk.

    Keeps only the dominant self-distortion, the first crosstalk beat
    and the thermal floor; the pure leakage term and all higher products
    of the crosstalk scalings are dropped.
    """
    p = sig.p_x if p_x is None else p_x
    g1, g2 = hw.gamma
    _, k2 = hw.kappa
    r1 = hw.rho[0]
    b = sig.beta
    xi = complex(sig.xi)
    if p <= 0:
        return np.inf
    return (
        6.0 * r1 * r1 * g1 ** 4 * p * p
        + 4.0 * r1 * b * g2 * (k2 * np.conj(xi)).real * g1 * g1 * p
        + hw.sigma_w2 / (g1 * g1 * p)
    )


def siso_optimal_power(gamma1: float, rho1: float, sigma_w2: float) -> float:
    """NMSE-minimizing power of a single isolated branch.

    Balances the quadratic distortion growth against the thermal floor:
    ``p = gamma1**-2 * (sigma_w2 / (12 rho1**2))**(1/3)``.
    """
    if gamma1 <= 0 or sigma_w2 <= 0:
        raise ValueError("gain and noise variance must be positive")
    if rho1 > 0:
        raise ValueError("compression coefficient must be <= 0")
    if rho1 == 0:
        raise NoFiniteOptimumError("distortion-free branch has no finite optimum")
    return (sigma_w2 / (12.0 * rho1 * rho1)) ** (1.0 / 3.0) / (gamma1 * gamma1)


@dataclass(frozen=True)
class BackoffSolution:
    """Result of the min-max back-off over the worst branch NMSE."""

    p_x_opt: float
    achieved: float
    active_case: str
    candidates: dict
    tied: bool = False


def _stationarity_cubic(coeffs, denom_unused, sigma_w2):
    c3, c2, _ = coeffs
    return np.array([2.0 * c3, c2, 0.0, -sigma_w2])


def minmax_backoff(hw: HardwareConfig, sig: SignalSpec) -> BackoffSolution:
    """Reference power minimizing the worse of the two branch NMSEs.

    The optimum is one of at most three closed-form candidates: the
    minimizer of either branch NMSE alone, or a crossing point where
    both NMSEs are equal.  Crossing candidates whose two branch values
    fail to agree within a small relative tolerance are discarded with a
    warning (they are artifacts of the root finder).
    """
    if sig.beta <= 0:
        raise ValueError("min-max back-off needs both branches active (beta > 0)")
    if hw.rho[0] == 0 or hw.rho[1] == 0:
        raise NoFiniteOptimumError("both branches must be compressive for a finite optimum")

    coeffs, denom = _branch_polynomials(hw, sig)
    sw2 = hw.sigma_w2

    def branch_values(p):
        e1 = _terms(coeffs[0], sw2, p).total
        e2 = _terms(coeffs[1], sw2, p).total
        return e1 / (denom[0] * p), e2 / (denom[1] * p)

    candidates: dict[str, float] = {}
    candidates["branch1_min"] = unique_positive_root(_stationarity_cubic(coeffs[0], denom[0], sw2))
    candidates["branch2_min"] = unique_positive_root(_stationarity_cubic(coeffs[1], denom[1], sw2))

    # Crossing polynomial: p * (NMSE1 - NMSE2) expressed in the branch
    # coefficients.  Fully symmetric setups make it vanish identically.
    diff = np.empty(4)
    scale = np.empty(4)
    pair_cols = (
        (coeffs[0][0] / denom[0], coeffs[1][0] / denom[1]),
        (coeffs[0][1] / denom[0], coeffs[1][1] / denom[1]),
        (coeffs[0][2] / denom[0], coeffs[1][2] / denom[1]),
        (sw2 / denom[0], sw2 / denom[1]),
    )
    for i, (lhs, rhs) in enumerate(pair_cols):
        diff[i] = lhs - rhs
        scale[i] = abs(lhs) + abs(rhs)
    if np.any(np.abs(diff) > 1e-12 * scale):
        balanced = []
        for p in real_roots(diff).positive_roots:
            n1, n2 = branch_values(p)
            if abs(n1 - n2) <= _BALANCE_TOL * max(n1, n2):
                balanced.append((max(n1, n2), p))
            else:
                warnings.warn(
                    "discarding crossing candidate with unequal branch NMSEs "
                    "(relative gap %.2e)" % (abs(n1 - n2) / max(n1, n2)),
                    stacklevel=2,
                )
        if balanced:
            candidates["balanced"] = min(balanced)[1]

    evaluated = {name: max(branch_values(p)) for name, p in candidates.items()}
    best = min(evaluated.values())
    winners = [name for name, v in evaluated.items() if v <= best * (1.0 + 1e-12)]
    # Ties resolve toward the smaller power.
    active = min(winners, key=lambda name: candidates[name])
    tied = len({round(candidates[w], 15) for w in winners}) > 1

    return BackoffSolution(
        p_x_opt=candidates[active],
        achieved=evaluated[active],
        active_case=active,
        candidates=candidates,
        tied=tied,
    )
