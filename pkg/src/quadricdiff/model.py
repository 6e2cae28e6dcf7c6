"""Coefficient bundles for ball and sphere diffusions and their validators.

A ball model has diffusion ``a(x) = (1 - |x|^2) alpha + c_H(x)`` and drift
``b + B x``; a sphere model has ``a = c_H`` and drift ``B x`` subject to the
coefficient identity ``2 x^T B x + tr(c_H(x)) = 0``.  The admissibility and
boundary-attainment inequalities over the unit sphere are decided exactly by
a secular-equation maximizer, never by sampling.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .cspace import c_H_eval, h_from_json, h_to_json, trace_form
from .skew import skew_dim
from . import sos as _sos

__all__ = [
    "BallModel",
    "SphereModel",
    "SphereQuadReport",
    "ValidationReport",
    "AttainmentReport",
    "a_eval",
    "drift_eval",
    "sphere_max_quadratic",
    "validate_ball",
    "validate_sphere",
    "boundary_attainment",
    "model_to_json",
    "model_from_json",
]


@dataclass(frozen=True)
class BallModel:
    """Unit-ball diffusion coefficients (alpha, H, b, B)."""

    alpha: np.ndarray
    H: np.ndarray
    b: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        d = self.d
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(d))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        m = skew_dim(d)
        if self.H.shape != (m, m):
            raise ValueError(f"H must be {m} x {m} for d = {d}, got {self.H.shape}")
        if self.B.shape != (d, d):
            raise ValueError(f"B must be {d} x {d}, got {self.B.shape}")

    @property
    def d(self):
        return np.asarray(self.alpha).shape[0]

    @property
    def space(self):
        return "ball"


@dataclass(frozen=True)
class SphereModel:
    """Unit-sphere diffusion coefficients (H, B)."""

    H: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        d = self.d
        if self.H.shape != (skew_dim(d),) * 2:
            raise ValueError(f"H must be {skew_dim(d)} square for d = {d}, got {self.H.shape}")

    @property
    def d(self):
        return np.asarray(self.B).shape[0]

    @property
    def space(self):
        return "sphere"


@dataclass
class SphereQuadReport:
    """Exact maximum of x^T M x + b^T x over the unit sphere."""

    max_value: float
    argmax: np.ndarray
    multiplier: float


@dataclass
class ValidationReport:
    admissible: bool
    positivity: str           # "verified" | "refuted" | "unverified"
    checks: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "admissible": bool(self.admissible),
            "positivity": self.positivity,
            "checks": _jsonable(self.checks),
        }


@dataclass
class AttainmentReport:
    status: str               # "InteriorInvariant" | "MayAttainBoundary"
    margin: float
    argmax: np.ndarray

    def to_json(self):
        return {
            "status": self.status,
            "margin": float(self.margin),
            "argmax": np.asarray(self.argmax).tolist(),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def a_eval(model, x):
    """Diffusion matrix a(x) of a ball or sphere model."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"x must have dimension {model.d}, got shape {x.shape}")
    c = c_H_eval(model.H, x)
    if model.space == "ball":
        return (1.0 - float(x @ x)) * model.alpha + c
    return c


def drift_eval(model, x):
    """Drift vector of a ball (b + Bx) or sphere (Bx) model."""
    x = np.asarray(x, dtype=float)
    if model.space == "ball":
        return model.b + model.B @ x
    return model.B @ x


def sphere_max_quadratic(M, b, tol=1e-13):
    """Global maximum of x^T M x + b^T x over the unit sphere, by secular equation.

    Eigendecomposes M and root-finds the Lagrange multiplier of
    ``2 M x + b = 2 lam x`` on the interval above the top eigenvalue, with the
    standard hard-case branch when b is orthogonal to the leading eigenspace.

    Returns
    -------
    SphereQuadReport
        max value, a unit argmax, and the multiplier; the stationarity
        residual ``|2 M x + b - 2 lam x|`` is at roundoff level.
    """
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    b = np.asarray(b, dtype=float).reshape(M.shape[0])
    d = M.shape[0]
    lam_all, V = np.linalg.eigh(M)
    lam_top = lam_all[-1]
    bt = V.T @ b
    bnorm = np.linalg.norm(b)

    def value(x):
        return float(x @ M @ x + b @ x)

    if bnorm == 0.0:
        x = V[:, -1]
        return SphereQuadReport(value(x), x, float(lam_top))

    scale = max(abs(lam_all).max(), bnorm, 1.0)
    top = np.abs(lam_all - lam_top) <= 1e-12 * scale
    b_top = np.linalg.norm(bt[top])

    def x_of(lam, skip_top=False):
        denom = 2.0 * (lam - lam_all)
        coeff = np.zeros(d)
        mask = ~top if skip_top else np.ones(d, dtype=bool)
        with np.errstate(divide="ignore"):
            coeff[mask] = bt[mask] / denom[mask]
        return V @ coeff, coeff

    if b_top <= 1e-13 * bnorm:
        # Hard case: b has no weight on the leading eigenspace.
        x_perp, coeff = x_of(lam_top, skip_top=True)
        nrm = np.linalg.norm(coeff)
        if nrm <= 1.0:
            tau = np.sqrt(max(0.0, 1.0 - nrm ** 2))
            vtop = V[:, np.nonzero(top)[0][0]]
            x = x_perp + tau * vtop
            return SphereQuadReport(value(x), x, float(lam_top))
        # |x(lam_top)| > 1: the secular root lies strictly above lam_top.
        lo = lam_top

        def secular(lam):
            _, coeff = x_of(lam, skip_top=True)
            return float(coeff @ coeff) - 1.0

    else:
        # The secular function blows up at lam_top and decreases to -1.
        lo = max(lam_top + 0.5 * b_top * (1.0 - 1e-12), np.nextafter(lam_top, np.inf))

        def secular(lam):
            _, coeff = x_of(lam)
            return float(coeff @ coeff) - 1.0 if np.all(np.isfinite(coeff)) else np.inf

        while secular(lo) < 0.0:
            lo = max(lam_top + 0.5 * (lo - lam_top), np.nextafter(lam_top, np.inf))
            if lo == np.nextafter(lam_top, np.inf):
                break
    hi = lam_top + 0.5 * bnorm * (1.0 + 1e-12) + 1e-30
    while secular(hi) > 0.0:
        hi = lam_top + 2.0 * (hi - lam_top)
    lam = brentq(secular, lo, hi, xtol=1e-15 * max(1.0, abs(lam_top)), rtol=8.9e-16)
    x, _ = x_of(lam, skip_top=b_top <= 1e-13 * bnorm)
    x = x / np.linalg.norm(x)
    return SphereQuadReport(value(x), x, float(lam))


def _positivity(H, d, sos_max_iter=20000):
    """Three-valued positivity of c_H: verified, refuted, or unverified."""
    verdict = _sos.sos_check(H, max_iter=sos_max_iter)
    if verdict.status == _sos.FEASIBLE:
        return "verified", {"sos_status": verdict.status}
    screen = _sos.nonneg_check(H)
    if screen.negative:
        return "refuted", {
            "sos_status": verdict.status,
            "negative_value": screen.min_value,
            "witness_x": screen.x,
            "witness_y": screen.y,
        }
    if verdict.status == _sos.INFEASIBLE and d <= 4:
        # Below dimension five a nonnegative form is always a sum of squares,
        # so SOS infeasibility refutes positivity outright.
        return "refuted", {"sos_status": verdict.status, "sos_complete_dim": True}
    return "unverified", {"sos_status": verdict.status, "min_found": screen.min_value}


def validate_ball(model, tol=1e-7):
    """Check admissibility of a ball model.

    Conditions: alpha PSD; c_H positive semidefinite (three-valued, via the
    SOS check with a one-sided numerical screen as fallback); and the drift
    inequality max over the unit sphere of
    ``b.x + x.(B_sym + C/2).x`` nonpositive, where tr c_H(x) = x.C.x.
    """
    d = model.d
    alpha_min = float(np.linalg.eigvalsh(model.alpha)[0]) if d else 0.0
    alpha_ok = alpha_min >= -1e-12

    positivity, pos_details = _positivity(model.H, d)

    C = trace_form(model.H, d)
    Bsym = 0.5 * (model.B + model.B.T)
    quad = sphere_max_quadratic(Bsym + 0.5 * C, model.b)
    drift_ok = quad.max_value <= tol

    report = ValidationReport(
        admissible=bool(alpha_ok and drift_ok and positivity != "refuted"),
        positivity=positivity,
        checks={
            "alpha": {"pass": alpha_ok, "min_eig": alpha_min},
            "positivity": pos_details,
            "drift": {
                "pass": drift_ok,
                "max_value": quad.max_value,
                "argmax": quad.argmax,
            },
        },
    )
    return report


def validate_sphere(model, tol=1e-9):
    """Check the sphere drift identity B + B^T + C = 0 and positivity of c_H."""
    d = model.d
    C = trace_form(model.H, d)
    resid = float(np.abs(model.B + model.B.T + C).max())
    identity_ok = resid <= tol
    positivity, pos_details = _positivity(model.H, d)
    return ValidationReport(
        admissible=bool(identity_ok and positivity != "refuted"),
        positivity=positivity,
        checks={
            "drift_identity": {"pass": identity_ok, "residual": resid},
            "positivity": pos_details,
        },
    )


def boundary_attainment(model, tol=1e-7):
    """Decide whether the open ball is invariant for an admissible ball model.

    InteriorInvariant iff max over the unit sphere of
    ``b.x + x.(B + alpha)_sym.x + tr(c_H(x))/2`` is nonpositive.

    Raises ValueError if the model fails validation first.
    """
    report = validate_ball(model, tol)
    if not report.admissible:
        raise ValueError("model is not admissible; run validate_ball for details")
    C = trace_form(model.H, model.d)
    Msym = 0.5 * (model.B + model.B.T) + model.alpha + 0.5 * C
    quad = sphere_max_quadratic(Msym, model.b)
    status = "InteriorInvariant" if quad.max_value <= tol else "MayAttainBoundary"
    return AttainmentReport(status, float(quad.max_value), quad.argmax)


def model_to_json(model):
    """Serialize a model to the {"space", "d", "alpha", "H", "b", "B"} schema."""
    out = {"space": model.space, "d": int(model.d)}
    out.update(h_to_json(model.H, model.d))
    out["B"] = model.B.tolist()
    if model.space == "ball":
        out["alpha"] = model.alpha.tolist()
        out["b"] = model.b.tolist()
    return out


def model_from_json(obj):
    """Load a BallModel or SphereModel from its JSON dict."""
    space = obj.get("space", "ball")
    H, d = h_from_json(obj)
    B = np.asarray(obj["B"], dtype=float)
    if space == "sphere":
        return SphereModel(H=H, B=B)
    alpha = np.asarray(obj["alpha"], dtype=float)
    b = np.asarray(obj.get("b", np.zeros(d)), dtype=float)
    return BallModel(alpha=alpha, H=H, b=b, B=B)
