"""Theta-parameter criteria linking the four-point deformation family to
classical sixth-Painleve solutions.

The deformation variable is t; the four local exponent parameters are
theta_0, theta_1, theta_t, theta_inf with kappa_1 - kappa_2 = theta_inf
and kappa_1 + kappa_2 = -(theta_0 + theta_1 + theta_t).  The scalar form
carries an extra apparent singularity at lambda with exponents {0, 2}
and conjugate coordinate mu.

Two arithmetic criteria are checked: an even-integer signed sum of the
thetas (flat line subbundle / reducibility side) and an integer among
the thetas (removable-singularity side).  Both together correspond to
rational solutions of the nonlinear equation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .connection import ScalarODE
from .numkit import CPoly, CRat, INTEGER_TOL, PreconditionError, near_integer

__all__ = [
    "ThetaData",
    "IsomonodromicData",
    "SpecialCaseError",
    "MatchingReport",
    "check_eqn2",
    "check_eqn3",
    "hamiltonian",
    "heun_from_theta",
    "constant_solution_case",
    "hypergeometric_reduction_case",
    "special_case_flags",
    "matching_report",
]


class SpecialCaseError(ValueError):
    """lambda collides with {0, 1, t}; use the dedicated reduction constructors."""


@dataclass(frozen=True)
class ThetaData:
    """Exponent parameters (theta0, theta1, thetat, thetainf).

    kappa1 = -(theta0+theta1+thetat-thetainf)/2 and
    kappa2 = -(theta0+theta1+thetat+thetainf)/2, so that
    kappa1 - kappa2 = thetainf exactly.
    """

    theta0: complex
    theta1: complex
    thetat: complex
    thetainf: complex

    def __post_init__(self):
        for f in ("theta0", "theta1", "thetat", "thetainf"):
            object.__setattr__(self, f, complex(getattr(self, f)))

    @property
    def kappa1(self) -> complex:
        return -(self.theta0 + self.theta1 + self.thetat - self.thetainf) / 2.0

    @property
    def kappa2(self) -> complex:
        return -(self.theta0 + self.theta1 + self.thetat + self.thetainf) / 2.0


@dataclass(frozen=True)
class IsomonodromicData:
    """Theta parameters plus the deformation point t and coordinates (lambda, mu)."""

    theta: ThetaData
    t: complex
    lam: complex
    mu: complex

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "mu", complex(self.mu))
        if abs(self.t) <= 1e-12 or abs(self.t - 1.0) <= 1e-12:
            raise PreconditionError("t must avoid {0, 1}")


def check_eqn2(th: ThetaData, tol: float = INTEGER_TOL):
    """First sign triple (s1, st, sinf) making theta0 + s1 theta1 + st thetat
    + sinf thetainf an even integer, or None."""
    for s1 in (1, -1):
        for st in (1, -1):
            for sinf in (1, -1):
                total = (th.theta0 + s1 * th.theta1 + st * th.thetat
                         + sinf * th.thetainf)
                half = near_integer(total / 2.0, tol=tol)
                if half is not None:
                    return (s1, st, sinf)
    return None


def check_eqn3(th: ThetaData, tol: float = INTEGER_TOL):
    """(name, n) for the first theta within tol of an integer n, or None."""
    for name, v in (("theta0", th.theta0), ("theta1", th.theta1),
                    ("thetat", th.thetat), ("thetainf", th.thetainf)):
        n = near_integer(v, tol=tol)
        if n is not None:
            return (name, n)
    return None


def hamiltonian(d: IsomonodromicData) -> complex:
    """H(lambda, mu, t; theta) of the deformation family.

    H = [lam(lam-1)(lam-t) mu^2
         - (theta0 (lam-1)(lam-t) + theta1 lam(lam-t)
            + (thetat - 1) lam(lam-1)) mu
         + kappa1 (kappa2 + 1)(lam - t)] / (t(t-1)).
    """
    th, t, lam, mu = d.theta, d.t, d.lam, d.mu
    quad = lam * (lam - 1.0) * (lam - t) * mu * mu
    lin = (th.theta0 * (lam - 1.0) * (lam - t)
           + th.theta1 * lam * (lam - t)
           + (th.thetat - 1.0) * lam * (lam - 1.0)) * mu
    const = th.kappa1 * (th.kappa2 + 1.0) * (lam - t)
    return (quad - lin + const) / (t * (t - 1.0))


def _pole_term(coeff: complex, root: complex) -> CRat:
    return CRat(CPoly([coeff]), CPoly.from_roots([root]))


def heun_from_theta(d: IsomonodromicData) -> ScalarODE:
    """Scalar form of the deformation family at (lambda, mu, t).

    y'' + ((1-theta0)/x + (1-theta1)/(x-1) + (1-thetat)/(x-t)
           - 1/(x-lambda)) y'
        + (kappa1(kappa2+1)/(x(x-1)) + lam(lam-1) mu /(x(x-1)(x-lambda))
           - t(t-1) H /(x(x-1)(x-t))) y = 0.

    lambda is an apparent singularity with exponents {0, 2}; collisions
    of lambda with {0, 1, t} raise SpecialCaseError (see the dedicated
    reduction constructors).
    """
    th, t, lam, mu = d.theta, d.t, d.lam, d.mu
    for p, name in ((0.0, "0"), (1.0, "1"), (t, "t")):
        if abs(lam - p) <= 1e-10 * max(1.0, abs(t)):
            raise SpecialCaseError(
                "lambda = %s; use constant_solution_case / "
                "hypergeometric_reduction_case for the merged forms" % name)
    H = hamiltonian(d)
    p1 = (_pole_term(1.0 - th.theta0, 0.0)
          + _pole_term(1.0 - th.theta1, 1.0)
          + _pole_term(1.0 - th.thetat, t)
          + _pole_term(-1.0, lam))
    x01 = CPoly.from_roots([0.0, 1.0])
    p0 = (CRat(CPoly([th.kappa1 * (th.kappa2 + 1.0)]), x01)
          + CRat(CPoly([lam * (lam - 1.0) * mu]), CPoly.from_roots([0.0, 1.0, lam]))
          + CRat(CPoly([-t * (t - 1.0) * H]), CPoly.from_roots([0.0, 1.0, t])))
    return ScalarODE(p1, p0)


def constant_solution_case(th: ThetaData, t: complex) -> ScalarODE:
    """Merged form at kappa1 = 0, lambda = t, mu = 0; admits y = 1.

    The lambda pole cancels against the t pole in the first-order
    coefficient and the zeroth-order coefficient vanishes identically.
    """
    if abs(th.kappa1) > 1e-10:
        raise PreconditionError("constant-solution case needs kappa1 = 0")
    d = IsomonodromicData(theta=th, t=t, lam=t, mu=0.0)
    # (1-thetat)/(x-t) - 1/(x-lam) collapses to -thetat/(x-t)
    p1 = (_pole_term(1.0 - th.theta0, 0.0)
          + _pole_term(1.0 - th.theta1, 1.0)
          + _pole_term(-th.thetat, d.t))
    zero = CRat(CPoly([0.0]), CPoly([1.0]))
    return ScalarODE(p1, zero)


def hypergeometric_reduction_case(th: ThetaData, t: complex,
                                  mu: complex = 0.0) -> ScalarODE:
    """Merged form at thetat = 0, lambda = t: the t-residue vanishes.

    The resulting equation has singular points {0, 1, infinity} only.
    """
    if abs(th.thetat) > 1e-10:
        raise PreconditionError("hypergeometric reduction needs thetat = 0")
    p1 = (_pole_term(1.0 - th.theta0, 0.0)
          + _pole_term(1.0 - th.theta1, 1.0))
    x01 = CPoly.from_roots([0.0, 1.0])
    p0 = CRat(CPoly([th.kappa1 * (th.kappa2 + 1.0)]), x01)
    return ScalarODE(p1, p0)


def special_case_flags(d: IsomonodromicData, tol: float = 1e-10) -> dict:
    """Which of the two merged-form reductions the data (theta, t, lam, mu) hits."""
    at_t = abs(d.lam - d.t) <= tol * max(1.0, abs(d.t))
    return {
        "constant_solution": bool(at_t and abs(d.theta.kappa1) <= tol
                                  and abs(d.mu) <= tol),
        "hypergeometric_reduction": bool(at_t and abs(d.theta.thetat) <= tol),
    }


@dataclass(frozen=True)
class MatchingReport:
    """Degeneration criteria for one theta tuple, side by side.

    eqn2 pairs with reducibility of the connection (kappa1 in {0,-1,...}
    or kappa2 in {-1,-2,...} up to symmetry); eqn3 pairs with an
    apparent/removable singularity (thetat in {1,2,...} up to symmetry);
    both at once correspond to rational solutions.
    """

    eqn2: tuple | None
    eqn3: tuple | None
    lr_type: bool
    was_type: bool
    rational: bool

    def to_json(self) -> str:
        payload = {
            "eqn2": list(self.eqn2) if self.eqn2 else None,
            "eqn3": [self.eqn3[0], self.eqn3[1]] if self.eqn3 else None,
            "lr_type": self.lr_type,
            "was_type": self.was_type,
            "rational": self.rational,
        }
        return json.dumps(payload, sort_keys=True)


def matching_report(th: ThetaData, tol: float = INTEGER_TOL) -> MatchingReport:
    """Pair the theta criteria with the connection-level degenerations."""
    w2 = check_eqn2(th, tol=tol)
    w3 = check_eqn3(th, tol=tol)
    k1 = near_integer(th.kappa1, tol=tol)
    k2 = near_integer(th.kappa2, tol=tol)
    lr = (k1 is not None and k1 <= 0) or (k2 is not None and k2 <= -1)
    nt = near_integer(th.thetat, tol=tol)
    was = nt is not None and nt >= 1
    return MatchingReport(
        eqn2=w2,
        eqn3=w3,
        lr_type=bool(lr),
        was_type=bool(was),
        rational=bool(w2 is not None and w3 is not None),
    )
