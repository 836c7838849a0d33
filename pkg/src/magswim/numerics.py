"""Fixed-dimension numerical kernels.

Everything downstream of the swimmer model reduces to small, fixed-size
problems: 3x3 singular value decompositions, 3x3 eigenvalue computations,
the bialternate product used for Hopf detection, and root finding for
degree-4 trigonometric polynomials.  These kernels are implemented here as
pure, deterministic functions with no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Svd3",
    "Spectrum3",
    "TrigRoots",
    "svd3",
    "eig3",
    "bialternate",
    "trig_poly_eval",
    "trig_poly_deriv",
    "trig_poly_roots",
]


def _require_finite(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


@dataclass(frozen=True)
class Svd3:
    """Rotation-constrained SVD of a 3x3 matrix.

    ``U @ diag(singular_values) @ V.T`` reconstructs the input.  Both ``U``
    and ``V`` are proper rotations (determinant +1); to make that possible
    for inputs with negative determinant the smallest singular value carries
    the sign of the determinant.  Values are sorted ``s[0] >= s[1] >= s[2]``.
    """

    singular_values: np.ndarray  # shape (3,)
    left_vectors: np.ndarray     # U, shape (3, 3), det = +1
    right_vectors: np.ndarray    # V, shape (3, 3), det = +1


@dataclass(frozen=True)
class Spectrum3:
    """Eigenvalues of a 3x3 real matrix.

    ``real_count`` is the number of eigenvalues on the real axis (3 or 1
    for a real matrix; complex roots come in conjugate pairs).
    """

    eigenvalues: np.ndarray  # shape (3,), complex
    real_count: int


@dataclass(frozen=True)
class TrigRoots:
    """Real roots of a degree-4 trigonometric polynomial on (-pi, pi].

    ``residuals`` and ``derivatives`` hold f(theta) and f'(theta) at each
    root; a small derivative signals a near-double root (tangency).
    ``degenerate`` is set when the polynomial vanishes identically or when
    roots closer than 1e-9 had to be merged.
    """

    thetas: np.ndarray
    residuals: np.ndarray
    derivatives: np.ndarray
    degenerate: bool


def svd3(M: np.ndarray) -> Svd3:
    """SVD of a 3x3 matrix with both singular-vector triads right-handed.

    The sign ambiguity of the standard SVD is resolved by flipping the last
    column of U and/or V (absorbing the flip into the smallest singular
    value) so that det(U) = det(V) = +1.
    """
    M = _require_finite(M, "matrix")
    if M.shape != (3, 3):
        raise ValueError("svd3 expects a 3x3 matrix")
    U, s, Vt = np.linalg.svd(M)
    V = Vt.T
    s = s.copy()
    U = U.copy()
    V = V.copy()
    if np.linalg.det(U) < 0:
        U[:, 2] = -U[:, 2]
        s[2] = -s[2]
    if np.linalg.det(V) < 0:
        V[:, 2] = -V[:, 2]
        s[2] = -s[2]
    return Svd3(singular_values=s, left_vectors=U, right_vectors=V)


def _cubic_roots(c2: float, c1: float, c0: float) -> tuple[np.ndarray, int]:
    """Roots of x^3 + c2 x^2 + c1 x + c0, closed form.

    Returns (roots, number of real roots).  Uses the trigonometric formula
    in the three-real-root regime and a Cardano evaluation otherwise, with
    the discriminant test guarded against cancellation so that near-multiple
    roots land in the (clamped) trigonometric branch.
    """
    # depressed cubic x = y - c2/3:  y^3 + a y + b
    a = c1 - c2 * c2 / 3.0
    b = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    shift = -c2 / 3.0
    scale = max(abs(a) ** 1.5, abs(b), 1e-300)
    disc = -4.0 * a ** 3 - 27.0 * b * b
    if disc >= -1e-12 * scale * scale:
        # three real roots (possibly multiple)
        if a >= 0.0:
            # a ~ 0 here (disc >= 0 forces a <= 0 up to roundoff): triple root
            y = np.full(3, np.cbrt(-b))
        else:
            m = 2.0 * np.sqrt(-a / 3.0)
            # a*m can underflow to -0.0 for subnormal coefficients
            arg = 3.0 * b / min(a * m, -1e-300)
            arg = min(1.0, max(-1.0, arg))
            t = np.arccos(arg) / 3.0
            y = m * np.cos(t - 2.0 * np.pi * np.arange(3) / 3.0)
        return (y + shift).astype(complex), 3
    # one real root, one conjugate pair; disc < 0 => b^2/4 + a^3/27 > 0
    rad = np.sqrt(b * b / 4.0 + a ** 3 / 27.0)
    t = -b / 2.0 - rad if b > 0 else -b / 2.0 + rad
    u = np.cbrt(t)
    y1 = u - a / (3.0 * u) if u != 0.0 else np.cbrt(-b)
    im = np.sqrt(max(0.75 * y1 * y1 + a, 0.0))
    roots = np.array(
        [y1 + shift, -y1 / 2.0 + shift + 1j * im, -y1 / 2.0 + shift - 1j * im],
        dtype=complex,
    )
    return roots, 1


def eig3(A: np.ndarray) -> Spectrum3:
    """Eigenvalues of a 3x3 real matrix via the closed-form cubic.

    Roots are polished with two complex Newton steps on the characteristic
    polynomial, which brings them to companion-matrix accuracy while keeping
    the computation iteration-free and deterministic.
    """
    A = _require_finite(A, "matrix")
    if A.shape != (3, 3):
        raise ValueError("eig3 expects a 3x3 matrix")
    norm = np.max(np.abs(A))
    if norm == 0.0:
        return Spectrum3(eigenvalues=np.zeros(3, dtype=complex), real_count=3)
    B = A / norm
    tr = np.trace(B)
    minors = (
        B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1]
        + B[0, 0] * B[2, 2] - B[0, 2] * B[2, 0]
        + B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
    )
    det = np.linalg.det(B)
    c2, c1, c0 = -tr, minors, -det
    roots, n_real = _cubic_roots(c2, c1, c0)
    # Newton polish on p(x) = x^3 + c2 x^2 + c1 x + c0
    for _ in range(2):
        p = roots ** 3 + c2 * roots ** 2 + c1 * roots + c0
        dp = 3.0 * roots ** 2 + 2.0 * c2 * roots + c1
        step = np.where(np.abs(dp) > 1e-12, p / np.where(dp == 0, 1, dp), 0.0)
        roots = roots - step
    if n_real == 3:
        roots = roots.real.astype(complex)
    else:
        # keep the conjugate pair exactly conjugate
        roots[2] = np.conj(roots[1])
        roots[0] = roots[0].real
    return Spectrum3(eigenvalues=roots * norm, real_count=n_real)


def bialternate(A: np.ndarray) -> np.ndarray:
    """Bialternate product 2A (.) I of a 3x3 matrix.

    The eigenvalues of the result are the pairwise sums of the eigenvalues
    of A, so a zero determinant flags either a purely imaginary conjugate
    pair (a Hopf candidate) or two opposite real eigenvalues.
    """
    A = _require_finite(A, "matrix")
    return np.array(
        [
            [A[0, 0] + A[1, 1], A[1, 2], -A[0, 2]],
            [A[2, 1], A[2, 2] + A[0, 0], A[0, 1]],
            [-A[2, 0], A[1, 0], A[1, 1] + A[2, 2]],
        ]
    )


def trig_poly_eval(a: np.ndarray, b: np.ndarray, theta) -> np.ndarray:
    """Evaluate f(theta) = sum_k a[k] cos(k theta) + b[k] sin(k theta)."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(len(a))
    kt = np.multiply.outer(theta, k)
    return np.cos(kt) @ np.asarray(a) + np.sin(kt) @ np.asarray(b)


def trig_poly_deriv(a: np.ndarray, b: np.ndarray, theta) -> np.ndarray:
    """Evaluate f'(theta) for the same coefficient convention."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(len(a))
    kt = np.multiply.outer(theta, k)
    return -np.sin(kt) @ (k * np.asarray(a)) + np.cos(kt) @ (k * np.asarray(b))


def _polypow(c: np.ndarray, n: int) -> np.ndarray:
    out = np.array([1.0])
    for _ in range(n):
        out = npoly.polymul(out, c)
    return out


def _half_angle_tables() -> tuple[np.ndarray, np.ndarray]:
    """Linear maps from harmonic coefficients to tan-half-angle polynomials.

    With z(t) = (1 - t^2) + 2 i t one has cos(k theta) + i sin(k theta) =
    z^k / (1+t^2)^k at theta = 2 arctan t, so the harmonic cos(k theta)
    contributes Re(z^k) (1+t^2)^(4-k) to (1+t^2)^4 f(2 arctan t) and
    sin(k theta) contributes Im(z^k) (1+t^2)^(4-k).  Both are degree-8
    polynomials with exactly representable integer coefficients; the maps
    are assembled once in exact polynomial arithmetic.
    """
    w = np.array([1.0, 2.0j, -1.0])          # z(t), ascending
    den = np.array([1.0, 0.0, 1.0])          # 1 + t^2
    Tc = np.zeros((9, 5))
    Ts = np.zeros((9, 5))
    zk = np.array([1.0 + 0.0j])
    for k in range(5):
        term = npoly.polymul(zk, _polypow(den, 4 - k))
        Tc[: len(term), k] = term.real
        Ts[: len(term), k] = term.imag
        zk = npoly.polymul(zk, w)
    return Tc, Ts


_HA_COS, _HA_SIN = _half_angle_tables()


def _half_angle_poly(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients (ascending in t) of (1+t^2)^4 f(2 arctan t)."""
    return _HA_COS @ a + _HA_SIN @ b


def trig_poly_roots(a, b, *, merge_tol: float = 1e-9) -> TrigRoots:
    """All real roots on (-pi, pi] of a degree-4 trigonometric polynomial.

    The polynomial is converted to an ordinary degree-8 polynomial in
    t = tan(theta/2) (so the degree bound, at most 8 roots, is exact), whose
    roots are taken from the companion matrix and Newton-refined on the
    original trigonometric form.  theta = pi, the pole of the substitution,
    is tested explicitly.  Roots closer than ``merge_tol`` are merged and
    the result flagged degenerate, as are identically-zero polynomials.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (5,) or b.shape != (5,):
        raise ValueError("expected 5 cosine and 5 sine coefficients (degree 4)")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite trig polynomial coefficients")
    coef_scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    empty = np.zeros(0)
    if coef_scale == 0.0:
        return TrigRoots(empty, empty.copy(), empty.copy(), degenerate=True)
    # normalize so that residual tolerances are relative to the
    # coefficient magnitude (roots are scale invariant)
    a = a / coef_scale
    b = b / coef_scale

    c = _half_angle_poly(a, b)
    cmax = np.max(np.abs(c))
    # trim numerically-zero leading coefficients (roots escaping to t = inf
    # correspond to theta = pi, which is handled explicitly below)
    deg = 8
    while deg > 0 and abs(c[deg]) < 1e-13 * cmax:
        deg -= 1
    candidates: list[float] = []
    if deg > 0:
        rts = np.roots(c[deg::-1])
        real_like = np.abs(rts.imag) < 1e-6 * (1.0 + np.abs(rts.real))
        candidates.extend(2.0 * np.arctan(rts.real[real_like]))
    candidates.append(np.pi)

    res_tol = 1e-12
    th = np.array(candidates)
    f = trig_poly_eval(a, b, th)
    active = np.ones(len(th), dtype=bool)
    for _ in range(60):
        df = trig_poly_deriv(a, b, th)
        ok = active & (df != 0.0)
        step = np.where(ok, f / np.where(df == 0.0, 1.0, df), 0.0)
        f_new = trig_poly_eval(a, b, th - step)
        upd = ok & (np.abs(f_new) < np.abs(f))
        th = np.where(upd, th - step, th)
        f = np.where(upd, f_new, f)
        active = upd & (np.abs(step) > 1e-16)
        if not active.any():
            break
    sel = np.abs(f) < res_tol
    # wrap to (-pi, pi]
    th = np.arctan2(np.sin(th[sel]), np.cos(th[sel]))
    th[th <= -np.pi + 1e-15] = np.pi
    roots = list(th)

    if not roots:
        return TrigRoots(empty, empty.copy(), empty.copy(), degenerate=False)
    roots = np.sort(np.array(roots))
    keep = [roots[0]]
    merged = False
    for th in roots[1:]:
        if th - keep[-1] < merge_tol:
            merged = True
        else:
            keep.append(th)
    # merge across the branch cut theta = pi ~ -pi
    if len(keep) > 1 and (keep[0] + 2 * np.pi) - keep[-1] < merge_tol:
        keep.pop()
        merged = True
    thetas = np.array(keep)
    return TrigRoots(
        thetas=thetas,
        residuals=coef_scale * trig_poly_eval(a, b, thetas),
        derivatives=coef_scale * trig_poly_deriv(a, b, thetas),
        degenerate=merged,
    )
