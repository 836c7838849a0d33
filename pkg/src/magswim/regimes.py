"""Experimental-regimes diagram over the driving parameters (Ma, cos psi).

For each cell of a parameter grid the equilibria are counted and
classified, producing labels "s/t" (t equilibria, s of them stable).  At
most five regimes occur in practice; the 0/t regimes with t > 0 are the
ones bounded by Hopf curves, where all equilibria exist but are unstable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import atlas, stability
from .swimmer import PDecomposition

__all__ = ["RegimeDiagram", "regime_diagram", "regime_of", "count_at"]


@dataclass(frozen=True)
class RegimeDiagram:
    """Equilibrium counts over a (Ma, cos psi) grid.

    ``ma_axis`` and ``cospsi_axis`` hold the cell-center coordinates.
    ``total_count`` and ``stable_count`` are (n_cospsi, n_ma) integer
    grids; ``labels`` holds the "s/t" strings and ``fold_flag`` marks
    cells where a near-fold or marginal equilibrium made the counts
    unreliable.
    """

    ma_axis: np.ndarray
    cospsi_axis: np.ndarray
    total_count: np.ndarray
    stable_count: np.ndarray
    labels: np.ndarray
    fold_flag: np.ndarray


def count_at(
    dec: PDecomposition, Ma: float, cos_psi: float
) -> tuple[int, int, bool]:
    """(total, stable, unreliable) equilibrium counts at one parameter point.

    The static-field limit Ma = 0 is degenerate: the body aligns its moment
    with the field, equilibria form circles with B = +m or B = -m, and the
    linearization always carries a structural zero eigenvalue along the
    circle.  That case is counted specially, with stability taken from the
    transverse eigenvalue pair; exactly one of the two alignments is
    transversally stable away from marginal cases.
    """
    if Ma == 0.0:
        return _count_static(dec, cos_psi)
    eqs = [
        stability.classify(dec, e) for e in atlas.solve_equilibria(dec, Ma, cos_psi)
    ]
    total = len(eqs)
    stable = sum(1 for e in eqs if e.index == 3 and not e.marginal)
    shaky = any(e.near_fold or e.marginal for e in eqs)
    return total, stable, shaky


def _count_static(dec: PDecomposition, cos_psi: float) -> tuple[int, int, bool]:
    """Equilibrium counts in the static-field limit Ma = 0."""
    from .numerics import eig3
    from .swimmer import skew

    width = float(np.sqrt(max(0.0, 1.0 - float(dec.beta0 @ dec.eta0) ** 2)))
    if abs(cos_psi) > width:
        return 0, 0, abs(abs(cos_psi) - width) < 1e-9
    total = 0
    stable = 0
    shaky = abs(abs(cos_psi) - width) < 1e-9
    for sgn in (1.0, -1.0):
        total += 1
        ev = eig3(dec.P @ skew(sgn * dec.m)).eigenvalues
        # drop the structural zero eigenvalue (A (sgn m) = 0 exactly)
        re = ev.real[np.argsort(np.abs(ev))[::-1][:2]]
        if np.all(re < -stability.MARGINAL_TOL):
            stable += 1
        if np.any(np.abs(re) <= stability.MARGINAL_TOL):
            shaky = True
    return total, stable, shaky


def regime_of(dec: PDecomposition, Ma: float, cos_psi: float) -> str:
    """Regime label "s/t" at a single driving-parameter point."""
    total, stable, _ = count_at(dec, Ma, cos_psi)
    return f"{stable}/{total}"


def regime_diagram(
    dec: PDecomposition,
    ma_range: tuple[float, float] | None = None,
    cospsi_range: tuple[float, float] = (-1.0, 1.0),
    nx: int = 300,
    ny: int = 300,
) -> RegimeDiagram:
    """Regime diagram on an nx (Ma) by ny (cos psi) grid of cell centers.

    The default Ma range [0, 1.05 sigma1] covers the full existence region
    with margin.  Sampling happens at cell centers so that counts are
    generically well defined; cells straddling folds are flagged instead
    of resolved.
    """
    if ma_range is None:
        ma_range = (0.0, 1.05 * dec.sigma1)
    if nx < 2 or ny < 2:
        raise ValueError("grid must be at least 2x2")
    ma_axis = ma_range[0] + (np.arange(nx) + 0.5) * (ma_range[1] - ma_range[0]) / nx
    cp_axis = (
        cospsi_range[0]
        + (np.arange(ny) + 0.5) * (cospsi_range[1] - cospsi_range[0]) / ny
    )
    total = np.zeros((ny, nx), dtype=int)
    stab = np.zeros((ny, nx), dtype=int)
    flag = np.zeros((ny, nx), dtype=bool)
    for iy, cp in enumerate(cp_axis):
        for ix, ma in enumerate(ma_axis):
            t, s, f = count_at(dec, float(ma), float(cp))
            total[iy, ix] = t
            stab[iy, ix] = s
            flag[iy, ix] = f
    labels = np.char.add(
        np.char.add(stab.astype(str), "/"), total.astype(str)
    )
    return RegimeDiagram(
        ma_axis=ma_axis,
        cospsi_axis=cp_axis,
        total_count=total,
        stable_count=stab,
        labels=labels,
        fold_flag=flag,
    )
