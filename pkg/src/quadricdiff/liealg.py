"""Lie-bracket closure of skew drives and smooth-density criteria.

The bracket-generated subspace of a drive (A_0; A_1..A_m) starts from the
diffusion directions and closes under commutators with every drive matrix.
Smooth transition densities on the sphere exist iff A_0 x_0 lies in the
closure applied to x_0; for the ball the test lifts to dimension d + 1 with
border generators built from a factorization of alpha.
"""

from dataclasses import dataclass

import numpy as np

from .simulate import SkewDrive
from .skew import skew_dim

__all__ = [
    "LieSubspace",
    "DensityReport",
    "bracket",
    "g_ideal",
    "density_check_sphere",
    "density_check_ball",
    "lift_drive",
]


@dataclass(frozen=True)
class LieSubspace:
    """Subspace of skew matrices with an orthonormal basis under the trace inner product."""

    d: int
    basis: np.ndarray      # (dim, d, d)
    dim: int
    ideal_residual: float = 0.0


@dataclass
class DensityReport:
    has_smooth_density: bool
    dim_g: int
    dim_h: int
    a0x0_in_gx0: bool
    membership_residual: float
    dim_gx0: int
    dim_hx0: int
    full_rotation: bool    # dim g equals C(d, 2)

    def to_json(self):
        return {
            "has_smooth_density": bool(self.has_smooth_density),
            "dim_g": int(self.dim_g),
            "dim_h": int(self.dim_h),
            "a0x0_in_gx0": bool(self.a0x0_in_gx0),
            "membership_residual": float(self.membership_residual),
            "dim_gx0": int(self.dim_gx0),
            "dim_hx0": int(self.dim_hx0),
            "full_rotation": bool(self.full_rotation),
        }


def bracket(A, B):
    """Matrix commutator AB - BA; skew whenever both arguments are."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A @ B - B @ A


def _orthonormal_rows(mats, d, tol):
    """Orthonormal basis (as matrices) of the span of a list of matrices."""
    if len(mats) == 0:
        return np.zeros((0, d, d))
    M = np.asarray(mats, dtype=float).reshape(len(mats), d * d)
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    if len(s) == 0 or s[0] == 0.0:
        return np.zeros((0, d, d))
    rank = int(np.sum(s > tol * s[0]))
    return Vt[:rank].reshape(rank, d, d)


def _project_residual(A, basis):
    """Frobenius distance from A to the span of an orthonormal matrix basis."""
    if basis.shape[0] == 0:
        return float(np.linalg.norm(A))
    coeffs = np.tensordot(basis, A, axes=2)
    return float(np.linalg.norm(A - np.tensordot(coeffs, basis, axes=1)))


def g_ideal(drive, tol=1e-10):
    """Bracket closure of the diffusion directions, and its extension by A_0.

    Starting from span{A_1..A_m}, repeatedly adjoins [B, A_p] for basis
    elements B and all p = 0..m until the rank stabilizes; terminates within
    C(d, 2) rounds since the dimension strictly grows.  Also returns the
    extension by A_0 and verifies the ideal property (brackets of the closure
    with every drive matrix stay inside the closure, up to tol).
    """
    d = drive.d
    gens = [drive.a0] + list(drive.diffusion)
    basis = _orthonormal_rows(list(drive.diffusion), d, tol)
    while True:
        new = [bracket(B, A) for B in basis for A in gens]
        enlarged = _orthonormal_rows(list(basis) + new, d, tol)
        if enlarged.shape[0] == basis.shape[0]:
            basis = enlarged
            break
        basis = enlarged

    ideal_residual = 0.0
    for B in basis:
        for A in gens:
            com = bracket(B, A)
            scale = max(1.0, np.linalg.norm(com))
            ideal_residual = max(ideal_residual, _project_residual(com, basis) / scale)
    g = LieSubspace(d, basis, basis.shape[0], ideal_residual)

    h_basis = _orthonormal_rows(list(basis) + [drive.a0], d, tol)
    h = LieSubspace(d, h_basis, h_basis.shape[0])
    if ideal_residual > tol:
        raise ArithmeticError(
            f"bracket closure failed the ideal property (residual {ideal_residual:.3e})"
        )
    return g, h


def _span_dim(vectors, tol):
    if len(vectors) == 0:
        return 0
    M = np.asarray(vectors)
    s = np.linalg.svd(M, compute_uv=False)
    if len(s) == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def density_check_sphere(drive, x0, tol=1e-9):
    """Smooth-density criterion on the sphere: is A_0 x_0 in the closure applied to x_0?

    Membership is tested by least-squares projection of A_0 x_0 onto
    span{B x_0} over the closure basis, with tolerance ``tol`` relative to
    |A_0 x_0| and an absolute floor of 1e-12.
    """
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-9:
        raise ValueError(f"|x0| = {np.linalg.norm(x0)} is not 1")
    g, h = g_ideal(drive, max(tol, 1e-12))
    a0x0 = drive.a0 @ x0
    gx0 = np.array([B @ x0 for B in g.basis]) if g.dim else np.zeros((0, drive.d))
    hx0 = np.array([B @ x0 for B in h.basis]) if h.dim else np.zeros((0, drive.d))
    if np.linalg.norm(a0x0) == 0.0:
        member, resid = True, 0.0
    elif g.dim == 0:
        member, resid = False, float(np.linalg.norm(a0x0))
    else:
        coeffs, _, _, _ = np.linalg.lstsq(gx0.T, a0x0, rcond=None)
        resid = float(np.linalg.norm(gx0.T @ coeffs - a0x0))
        member = resid <= max(tol * np.linalg.norm(a0x0), 1e-12)
    return DensityReport(
        has_smooth_density=member,
        dim_g=g.dim,
        dim_h=h.dim,
        a0x0_in_gx0=member,
        membership_residual=resid,
        dim_gx0=_span_dim(gx0, 1e-10),
        dim_hx0=_span_dim(hx0, 1e-10),
        full_rotation=g.dim == skew_dim(drive.d),
    )


def lift_drive(drive, alpha, tol=1e-12):
    """Embed a ball drive into dimension d + 1 with border generators from alpha.

    Each drive matrix becomes its block-diagonal extension, and every factor
    a_i of alpha = sum a_i a_i^T (eigenvectors scaled by root eigenvalues,
    small eigenvalues dropped) contributes a generator rotating into the
    extra coordinate.
    """
    d = drive.d
    alpha = np.asarray(alpha, dtype=float)
    w, V = np.linalg.eigh(0.5 * (alpha + alpha.T))
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise ValueError(f"alpha is not positive semidefinite (min eig {w[0]:.2e})")
    factors = [np.sqrt(wi) * V[:, i] for i, wi in enumerate(w) if wi > tol]

    def embed(A):
        out = np.zeros((d + 1, d + 1))
        out[:d, :d] = A
        return out

    def border(a):
        out = np.zeros((d + 1, d + 1))
        out[:d, d] = a
        out[d, :d] = -a
        return out

    diffusion = [embed(A) for A in drive.diffusion] + [border(a) for a in factors]
    diffusion = np.array(diffusion) if diffusion else np.zeros((0, d + 1, d + 1))
    return SkewDrive(embed(drive.a0), diffusion)


def density_check_ball(drive, alpha, x0, tol=1e-9):
    """Smooth-density criterion for the mean-reverting ball dynamics.

    Lifts the drive to the sphere in dimension d + 1 and reports a smooth
    interior density iff the lifted closure is all of Skew(d + 1).
    """
    x0 = np.asarray(x0, dtype=float)
    lifted = lift_drive(drive, alpha)
    z0 = np.concatenate([x0, [np.sqrt(max(0.0, 1.0 - float(x0 @ x0)))]])
    nz = np.linalg.norm(z0)
    z0 = z0 / nz if nz > 0 else z0
    g, h = g_ideal(lifted, max(tol, 1e-12))
    full = g.dim == skew_dim(drive.d + 1)
    a0z0 = lifted.a0 @ z0
    gz0 = np.array([B @ z0 for B in g.basis]) if g.dim else np.zeros((0, drive.d + 1))
    return DensityReport(
        has_smooth_density=full,
        dim_g=g.dim,
        dim_h=h.dim,
        a0x0_in_gx0=bool(full or np.linalg.norm(a0z0) == 0.0),
        membership_residual=0.0,
        dim_gx0=_span_dim(gz0, 1e-10),
        dim_hx0=_span_dim(gz0, 1e-10),
        full_rotation=full,
    )
