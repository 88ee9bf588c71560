"""Degeneration detectors for rank-2 Fuchsian connections.

Three mechanisms make the monodromy of a four-point connection special:
a pair of residues that can be diagonalised together (so the two local
monodromies share a full eigenbasis), a residue with eigenvalues {0, m}
for a nonzero integer m (candidate apparent singularity), and an
eigenvalue -n, n natural, at infinity (local reducibility there).  The
predictors below only use residue data; the monodromy module provides
the corroborating path-integral checks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .connection import INFINITY, FuchsianConnection, HeunParameters
from .numkit import (
    INTEGER_TOL,
    LINALG_TOL,
    PreconditionError,
    eig_small,
    near_integer,
    simultaneously_diagonalisable,
)

__all__ = [
    "DegeneracyReport",
    "ReducibilityWitness",
    "check_wgrm",
    "check_was",
    "check_lr",
    "predict_reducible",
    "integer_hyperplanes",
    "analyze_connection",
]


def _point_key(p):
    return "inf" if p is INFINITY else [float(complex(p).real), float(complex(p).imag)]


def check_wgrm(c: FuchsianConnection, p1, p2, tol: float = LINALG_TOL) -> bool:
    """True iff the residues at p1 and p2 are simultaneously diagonalisable.

    Either argument may be the infinity marker; the infinity residue is
    the negated sum of the finite ones.
    """
    A = c.residue_at(p1)
    B = c.residue_at(p2)
    try:
        return bool(simultaneously_diagonalisable(
            np.asarray(A), np.asarray(B), tol=tol))
    except PreconditionError:
        return False


def check_was(c: FuchsianConnection, point, tol: float = INTEGER_TOL):
    """Integer m != 0 when the residue at `point` has eigenvalues {0, m}.

    Negative m qualifies as well.  Returns None when no eigenvalue
    vanishes, when the nonzero eigenvalue is not an integer, or when the
    residue is zero (removable point, reported separately by the
    analyzer).
    """
    A = np.asarray(c.residue_at(point))
    vals = [lam for lam, _ in eig_small(A)]
    scale = max(1.0, float(np.linalg.norm(A)))
    zeros = [v for v in vals if abs(v) <= tol * scale]
    if not zeros:
        return None
    others = sorted(vals, key=abs)[1:]
    if not others:
        return None
    m = near_integer(others[0], tol=tol * scale)
    if m is None or m == 0:
        return None
    return m


def check_lr(c: FuchsianConnection, tol: float = INTEGER_TOL):
    """Smallest n >= 0 with -n an eigenvalue of the infinity residue, else None."""
    vals = [lam for lam, _ in eig_small(np.asarray(c.a_infinity()))]
    hits = []
    for v in vals:
        n = near_integer(-v, tol=tol * max(1.0, abs(v)))
        if n is not None and n >= 0:
            hits.append(n)
    return min(hits) if hits else None


@dataclass(frozen=True)
class ReducibilityWitness:
    """Eigenvalue selection with integer sum plus a commuting residue pair."""

    selection: tuple          # ((point_key, eigenvalue), ...) over all 4 points
    total: int
    pair: tuple               # the two points whose residues commute

    def to_json(self) -> str:
        payload = {
            "selection": [[_point_key(p), [v.real, v.imag]]
                          for p, v in self.selection],
            "total": self.total,
            "pair": [_point_key(p) for p in self.pair],
        }
        return json.dumps(payload, sort_keys=True)


def predict_reducible(c: FuchsianConnection, tol: float = INTEGER_TOL):
    """Witness for the residue-level reducibility prediction, or None.

    Enumerates the 16 selections of one residue eigenvalue per singular
    point (infinity included) looking for an integer total, and the 6
    point pairs looking for a simultaneously diagonalisable pair; a
    witness requires both.  Positive verdicts should be corroborated by
    monodromy.invariant_line.
    """
    if len(c.points) != 3:
        raise PreconditionError("expected 3 finite singular points")
    all_points = list(c.points) + [INFINITY]
    eigs = []
    for p in all_points:
        vals = [lam for lam, _ in eig_small(np.asarray(c.residue_at(p)))]
        eigs.append(vals)
    best = None
    for mask in range(16):
        sel = [eigs[j][(mask >> j) & 1] for j in range(4)]
        total = sum(sel)
        n = near_integer(total, tol=tol * max(1.0, abs(total)))
        if n is None:
            continue
        best = (tuple(zip(all_points, (complex(s) for s in sel))), n)
        break
    if best is None:
        return None
    pair = None
    for i in range(4):
        for j in range(i + 1, 4):
            if check_wgrm(c, all_points[i], all_points[j]):
                pair = (all_points[i], all_points[j])
                break
        if pair:
            break
    if pair is None:
        return None
    return ReducibilityWitness(selection=best[0], total=best[1], pair=pair)


def integer_hyperplanes(h: HeunParameters, tol: float = INTEGER_TOL) -> dict:
    """Which of gamma, delta, epsilon, alpha-beta lie in Z minus {0}.

    A nonempty result is the necessary residue-level condition for an
    apparent singularity somewhere in the Kummer orbit.
    """
    out = {}
    candidates = {
        "gamma": h.gamma,
        "delta": h.delta,
        "epsilon": h.epsilon,
        "alpha_minus_beta": h.alpha - h.beta,
    }
    for name, v in candidates.items():
        n = near_integer(v, tol=tol * max(1.0, abs(v)))
        if n is not None and n != 0:
            out[name] = n
    return out


@dataclass(frozen=True)
class DegeneracyReport:
    """Summary of every residue-level degeneration found on a connection."""

    wgrm: tuple | None            # pair of points, or None
    was: tuple                    # ((point, m), ...)
    lr: int | None
    hyperplanes: dict
    removable: tuple              # points with zero residue

    def to_json(self) -> str:
        payload = {
            "wgrm": [_point_key(p) for p in self.wgrm] if self.wgrm else None,
            "was": [[_point_key(p), m] for p, m in self.was],
            "lr": self.lr,
            "hyperplanes": self.hyperplanes,
            "removable": [_point_key(p) for p in self.removable],
        }
        return json.dumps(payload, sort_keys=True)


def analyze_connection(c: FuchsianConnection, h: HeunParameters | None = None,
                       tol: float = INTEGER_TOL) -> DegeneracyReport:
    """Run every detector and collect the verdicts.

    The first simultaneously-diagonalisable pair (in point order, with
    infinity last) is reported for the commuting-pair condition; the
    integer-eigenvalue condition is evaluated at every singular point.
    """
    all_points = list(c.points) + [INFINITY]
    wgrm = None
    for i in range(len(all_points)):
        for j in range(i + 1, len(all_points)):
            if check_wgrm(c, all_points[i], all_points[j]):
                wgrm = (all_points[i], all_points[j])
                break
        if wgrm:
            break
    was = []
    removable = []
    for p in all_points:
        A = np.asarray(c.residue_at(p))
        if float(np.linalg.norm(A)) <= tol:
            removable.append(p)
            continue
        m = check_was(c, p, tol=tol)
        if m is not None:
            was.append((p, m))
    lr = check_lr(c, tol=tol)
    hyper = integer_hyperplanes(h, tol=tol) if h is not None else {}
    return DegeneracyReport(wgrm=wgrm, was=tuple(was), lr=lr,
                            hyperplanes=hyper, removable=tuple(removable))
