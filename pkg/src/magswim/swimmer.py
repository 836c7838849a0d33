"""Swimmer data model.

A swimmer is described by the three blocks of its nondimensional 6x6
mobility matrix together with the direction of its permanent magnetic
moment.  Definitions may supply drag blocks instead (they are inverted and
symmetrized on ingestion).  From these inputs the module computes the
singular value decomposition of P = M22 [m]x, the scalar coefficients that
drive the whole analytic equilibrium chart, and the chirality data used for
velocity conversions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .numerics import svd3

__all__ = [
    "Swimmer",
    "PDecomposition",
    "ChiralityData",
    "skew",
    "load_swimmer",
    "load_swimmer_path",
    "bundled_swimmer",
    "bundled_names",
    "decompose",
    "chirality",
]


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(v) @ w = v x w."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Swimmer:
    """Immutable mobility-space description of a magnetic swimmer.

    Mobility blocks are nondimensional: M11 scales as 1/(eta l), M12 as
    1/(eta l^2), M22 as 1/(eta l^3).  ``m`` is the unit magnetic moment
    direction in the body frame.  ``length_scale`` (meters) and
    ``time_scale`` (eta l^3 / (m B), seconds) are documentation-only
    metadata.  ``chart_sign`` and ``triad_parity`` select the orientation
    of the singular-vector triads used by :func:`decompose`; they exist so
    that bundled definitions reproduce published sign conventions while the
    default decomposition stays intrinsic.
    """

    name: str
    M11: np.ndarray
    M12: np.ndarray
    M22: np.ndarray
    m: np.ndarray
    length_scale: float = 1.0
    time_scale: float = 1.0
    chart_sign: int = 1
    triad_parity: int = 1


@dataclass(frozen=True)
class PDecomposition:
    """SVD data of P = M22 [m]x and derived chart coefficients.

    The right triad is (beta0 = m, beta1, beta2) and the left triad is
    (eta0 = M22^-1 m normalized, eta1, eta2), with P beta_i = sigma_i eta_i.
    ``theta0`` locates the vertical self-intersection lines of the
    equilibrium surface and is defined modulo pi.  ``ch`` is the chirality
    matrix M12 M22^-1 and ``vmat`` = M12 [m]x maps the field direction to
    the body-frame translational velocity.
    """

    name: str
    P: np.ndarray
    sigma1: float
    sigma2: float
    beta0: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    eta0: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    c01: float
    c02: float
    c11: float
    c12: float
    theta0: float
    degenerate: bool
    ch: np.ndarray
    vmat: np.ndarray
    M22: np.ndarray
    m: np.ndarray


@dataclass(frozen=True)
class ChiralityData:
    """Chirality matrix and the scalar conversion factors derived from it.

    ``abs_ch`` averages the reciprocal easy-axis mobilities against the
    coupling entry (M12)_13; ``f_perp`` is the harmonic mean of the first
    two rotational mobilities.  Both are used to convert nondimensional
    frequency/velocity axes between published scalings.
    """

    Ch: np.ndarray
    abs_ch: float
    f_perp: float


def _as_block(doc: dict, key: str) -> np.ndarray:
    try:
        block = np.array(doc[key], dtype=float)
    except KeyError as exc:
        raise ValueError(f"missing matrix block {key!r}") from exc
    if block.shape != (3, 3):
        raise ValueError(f"matrix block {key!r} must be 3x3")
    if not np.all(np.isfinite(block)):
        raise ValueError(f"matrix block {key!r} has non-finite entries")
    return block


def load_swimmer(document) -> Swimmer:
    """Build a Swimmer from a definition document.

    ``document`` is a JSON object (given as text or an already-parsed dict)
    with fields ``name``, ``length_scale``, ``m`` and either a ``drag``
    object with blocks D11/D12/D22 or a ``mobility`` object with blocks
    M11/M12/M22, all row-major 3x3 arrays.  Drag input is inverted and the
    inverse symmetrized, which removes the small asymmetries produced by
    numerical drag computations.  ``m`` is normalized.
    """
    if isinstance(document, (str, bytes)):
        doc = json.loads(document)
    else:
        doc = dict(document)
    name = doc.get("name", "unnamed")
    if "drag" in doc:
        D11 = _as_block(doc["drag"], "D11")
        D12 = _as_block(doc["drag"], "D12")
        D22 = _as_block(doc["drag"], "D22")
        D = np.block([[D11, D12], [D12.T, D22]])
        Dinv = np.linalg.inv(D)
        M = 0.5 * (Dinv + Dinv.T)
        M11, M12, M22 = M[:3, :3], M[:3, 3:], M[3:, 3:]
    elif "mobility" in doc:
        M11 = _as_block(doc["mobility"], "M11")
        M12 = _as_block(doc["mobility"], "M12")
        M22 = _as_block(doc["mobility"], "M22")
        M11 = 0.5 * (M11 + M11.T)
        M22 = 0.5 * (M22 + M22.T)
    else:
        raise ValueError("definition must contain a 'drag' or 'mobility' object")
    m = np.array(doc.get("m", ()), dtype=float)
    if m.shape != (3,):
        raise ValueError("'m' must be a 3-vector")
    norm_m = np.linalg.norm(m)
    if norm_m == 0.0 or not np.isfinite(norm_m):
        raise ValueError("'m' must be a nonzero finite vector")
    m = m / norm_m
    if np.any(np.linalg.eigvalsh(M22) <= 0.0):
        raise ValueError("M22 must be symmetric positive definite")
    return Swimmer(
        name=name,
        M11=_frozen(M11),
        M12=_frozen(M12),
        M22=_frozen(M22),
        m=_frozen(m),
        length_scale=float(doc.get("length_scale", 1.0)),
        time_scale=float(doc.get("time_scale", 1.0)),
        chart_sign=int(doc.get("chart_sign", 1)),
        triad_parity=int(doc.get("triad_parity", 1)),
    )


def load_swimmer_path(path) -> Swimmer:
    """Load a swimmer definition from a JSON file."""
    return load_swimmer(Path(path).read_text())


def bundled_names() -> list[str]:
    """Names of the swimmer definitions shipped with the package."""
    pkg = resources.files("magswim.data")
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".json"))


def bundled_swimmer(name: str) -> Swimmer:
    """Load one of the bundled swimmer definitions by name."""
    pkg = resources.files("magswim.data")
    try:
        text = (pkg / f"{name}.json").read_text()
    except FileNotFoundError as exc:
        raise ValueError(
            f"unknown bundled swimmer {name!r}; available: {bundled_names()}"
        ) from exc
    return load_swimmer(text)


def decompose(s: Swimmer) -> PDecomposition:
    """Singular value decomposition of P = M22 [m]x with canonical signs.

    P always has rank 2 with right null vector m and left null vector along
    M22^-1 m.  The two singular triads are fixed intrinsically: beta0 = m
    exactly, (beta0, beta1, beta2) right-handed, and the joint sign of
    (beta1, beta2) chosen so that c01 > 0 (ties broken by c02 > 0, then by
    the largest component of beta1).  The swimmer's ``chart_sign`` then
    optionally flips (beta1, beta2) jointly and ``triad_parity`` flips
    beta2 alone, which is enough to reproduce any published sign
    convention.  The eta triad follows from eta_i = P beta_i / sigma_i.
    """
    m = s.m / np.linalg.norm(s.m)
    P = s.M22 @ skew(m)
    dec = svd3(P)
    sig = dec.singular_values
    sigma1, sigma2 = float(sig[0]), float(sig[1])
    if sigma1 <= 0.0:
        raise ValueError("P vanishes: M22 [m]x has no positive singular value")
    b1 = dec.right_vectors[:, 0].copy()
    b2 = dec.right_vectors[:, 1].copy()
    if np.linalg.det(np.column_stack([m, b1, b2])) < 0.0:
        b2 = -b2
    c01 = m @ P @ b1
    c02 = m @ P @ b2
    tol = 1e-12 * sigma1
    flip = False
    if abs(c01) > tol:
        flip = c01 < 0.0
    elif abs(c02) > tol:
        flip = c02 < 0.0
    else:
        flip = b1[np.argmax(np.abs(b1))] < 0.0
    if flip:
        b1, b2 = -b1, -b2
    if s.chart_sign < 0:
        b1, b2 = -b1, -b2
    if s.triad_parity < 0:
        b2 = -b2
    e1 = P @ b1 / sigma1
    e2 = P @ b2 / sigma2
    e0 = np.linalg.solve(s.M22, m)
    e0 = e0 / np.linalg.norm(e0)
    c01 = float(m @ P @ b1)
    c02 = float(m @ P @ b2)
    c11 = float(b1 @ P @ b1)
    c12 = float(b1 @ (P + P.T) @ b2)
    degenerate = (sigma1 - sigma2) < 1e-8 * sigma1
    num = -c01 * sigma2
    den = c02 * sigma1
    if abs(den) > 1e-12 * max(abs(num), sigma1 * sigma2):
        theta0 = float(np.arctan(num / den))
    elif abs(num) > 0.0:
        theta0 = float(np.copysign(np.pi / 2.0, num))
    else:
        theta0 = np.pi / 2.0
    ch = s.M12 @ np.linalg.inv(s.M22)
    return PDecomposition(
        name=s.name,
        P=_frozen(P),
        sigma1=sigma1,
        sigma2=sigma2,
        beta0=_frozen(m),
        beta1=_frozen(b1),
        beta2=_frozen(b2),
        eta0=_frozen(e0),
        eta1=_frozen(e1),
        eta2=_frozen(e2),
        c01=c01,
        c02=c02,
        c11=c11,
        c12=c12,
        theta0=theta0,
        degenerate=bool(degenerate),
        ch=_frozen(ch),
        vmat=_frozen(s.M12 @ skew(m)),
        M22=_frozen(s.M22),
        m=_frozen(m),
    )


def chirality(s: Swimmer) -> ChiralityData:
    """Chirality matrix Ch = M12 M22^-1 and scalar conversion factors."""
    M22 = s.M22
    if abs(np.linalg.det(M22)) < 1e-300:
        raise ValueError("M22 is singular")
    Ch = s.M12 @ np.linalg.inv(M22)
    inv11 = 1.0 / M22[0, 0]
    inv22 = 1.0 / M22[1, 1]
    inv33 = 1.0 / M22[2, 2]
    abs_ch = abs(s.M12[0, 2] * (inv11 + inv33) / 2.0)
    f_perp = 2.0 / (inv11 + inv22)
    return ChiralityData(Ch=_frozen(Ch), abs_ch=float(abs_ch), f_perp=float(f_perp))
