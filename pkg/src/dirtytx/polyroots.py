"""Real-root extraction for the low-degree polynomials of the library.

Every optimization in this package reduces to real roots of polynomials
of degree six or less with real coefficients.  Roots come from the
companion-matrix eigenvalues and are then polished with a few Newton
steps so that downstream tolerances do not inherit eigenvalue error.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePolynomialError, RootStructureError

__all__ = ["RootReport", "real_roots", "unique_positive_root"]

# Companion eigenvalues with an imaginary part above this (relative)
# threshold are treated as genuinely complex and dropped.
_IMAG_TOL = 1e-7
# Leading coefficients below this fraction of the largest coefficient
# are treated as zero and trimmed, reducing the degree.
_TRIM_TOL = 1e-13
_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class RootReport:
    """Real roots of one polynomial, sorted ascending.

    ``residuals`` holds ``|p(root)|`` per root; near-multiple roots are
    reported individually rather than merged.
    """

    coefficients: np.ndarray
    roots: np.ndarray
    residuals: np.ndarray

    @property
    def positive_roots(self) -> np.ndarray:
        return self.roots[self.roots > 0]


def _trim(coeffs: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        raise DegeneratePolynomialError("all polynomial coefficients are zero")
    keep = np.abs(coeffs) > _TRIM_TOL * scale
    first = int(np.argmax(keep))
    trimmed = coeffs[first:]
    if trimmed.size <= 1:
        raise DegeneratePolynomialError("polynomial has no remaining degree after trimming")
    return trimmed


def _polish(coeffs: np.ndarray, deriv: np.ndarray, x: float) -> float:
    """A few guarded Newton steps around a companion eigenvalue."""
    best = x
    best_res = abs(np.polyval(coeffs, x))
    for _ in range(12):
        d = np.polyval(deriv, x)
        if d == 0:
            break
        step = np.polyval(coeffs, x) / d
        x = x - step
        res = abs(np.polyval(coeffs, x))
        if res < best_res:
            best, best_res = x, res
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return best


def real_roots(coefficients) -> RootReport:
    """All real roots of a real-coefficient polynomial.

    Coefficients are highest power first.  The leading coefficient may
    be (numerically) zero; the degree is reduced accordingly.  Each
    reported root satisfies
    ``|p(root)| <= 1e-8 * max|coeff| * max(1, |root|)**degree``.
    """
    coeffs = np.atleast_1d(np.asarray(coefficients, dtype=float))
    coeffs = _trim(coeffs)
    degree = coeffs.size - 1
    scale = np.max(np.abs(coeffs))
    work = coeffs / scale
    deriv = np.polyder(work)

    raw = np.roots(work)
    out = []
    for z in raw:
        if abs(z.imag) > _IMAG_TOL * max(1.0, abs(z)):
            continue
        out.append(_polish(work, deriv, float(z.real)))
    out.sort()
    roots = np.array(out, dtype=float)
    residuals = np.abs(np.polyval(coeffs, roots)) if roots.size else np.empty(0)

    bound = _RESIDUAL_TOL * scale * np.maximum(1.0, np.abs(roots)) ** degree
    ok = residuals <= bound if roots.size else np.ones(0, dtype=bool)
    return RootReport(coefficients=coeffs, roots=roots[ok], residuals=residuals[ok])


def unique_positive_root(coefficients) -> float:
    """The single positive root of a sign-structured polynomial.

    Raises
    ------
    RootStructureError
        If zero or more than one distinct positive root is found, which
        means the caller's structural assumption about the coefficient
        signs does not hold.
    """
    report = real_roots(coefficients)
    pos = report.positive_roots
    if pos.size > 1:
        # Collapse polishing artifacts: companion eigenvalues of a
        # near-multiple pair can land on the same point after Newton.
        distinct = [pos[0]]
        for r in pos[1:]:
            if r - distinct[-1] > 1e-9 * max(1.0, abs(r)):
                distinct.append(r)
        pos = np.array(distinct)
    if pos.size == 0:
        raise RootStructureError("expected one positive root, found none")
    if pos.size > 1:
        raise RootStructureError(
            "expected one positive root, found %d: %s" % (pos.size, pos)
        )
    return float(pos[0])
