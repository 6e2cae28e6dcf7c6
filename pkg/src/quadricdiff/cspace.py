"""The linear space of tangential diffusion coefficients on the sphere.

A symmetric m x m matrix H (m = C(d,2)) induces the matrix-valued quadratic
map ``c_H(x) = sum_pq h_pq D_p x x^T D_q^T``, which satisfies c_H(x) x = 0
identically.  Coefficient maps c are stored as (d, d, d, d) tensors C with
``c_ij(x) = x^T C[i, j] x`` and the symmetries C[i,j] = C[j,i],
C[i,j,k,l] = C[i,j,l,k].  All identities are checked on coefficients,
never by sampling alone.

The kernel of H -> c_H has dimension C(d, 4) and is spanned by the
Plucker-relation matrices returned by :func:`k_basis`.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .skew import pi_index, skew_basis, skew_dim, skew_to_vec, vec_to_skew

__all__ = [
    "TangencyError",
    "KBasisElement",
    "c_H_eval",
    "biquadratic_eval",
    "h_action",
    "cmap_from_h",
    "cmap_from_pair",
    "cmap_eval",
    "trace_form",
    "c_space_basis",
    "k_basis",
    "k_matrix",
    "h_from_c",
    "c_from_biquadratic",
    "h_to_json",
    "h_from_json",
    "cmap_to_json",
    "cmap_from_json",
]


class TangencyError(ValueError):
    """Input map is not tangential (c(x) x != 0 as a coefficient identity).

    ``self.residual`` is the Frobenius distance between the input and its
    best representation as some c_H.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = float(residual)


@dataclass(frozen=True)
class KBasisElement:
    """One Plucker kernel basis matrix, tied to its increasing 4-tuple of indices."""

    quad: tuple
    matrix: np.ndarray


def _check_h(H):
    H = np.asarray(H, dtype=float)
    m = H.shape[0]
    if H.shape != (m, m):
        raise ValueError(f"H must be square, got shape {H.shape}")
    if m > 0 and not np.allclose(H, H.T, rtol=0, atol=0):
        H = 0.5 * (H + H.T)
    return H


def c_H_eval(H, x):
    """Evaluate c_H at a point: sum_pq h_pq (D_p x)(D_q x)^T, a symmetric d x d matrix."""
    H = _check_h(H)
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if H.shape[0] != skew_dim(d):
        raise ValueError(f"H is {H.shape[0]} x {H.shape[0]} but C({d},2) = {skew_dim(d)}")
    if H.shape[0] == 0:
        return np.zeros((d, d))
    M = skew_basis(d) @ x          # row p is D_p x
    return M.T @ H @ M


def biquadratic_eval(H, x, y):
    """The biquadratic form y^T c_H(x) y, evaluated as a quadratic form in vec(xy^T - yx^T)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same dimension")
    H = _check_h(H)
    if H.shape[0] != skew_dim(x.shape[0]):
        raise ValueError("H size does not match the dimension of x")
    a = skew_to_vec(np.outer(x, y) - np.outer(y, x))
    return float(a @ H @ a)


def h_action(H, A):
    """Apply H as a symmetric linear map on skew matrices (componentwise on vec)."""
    H = _check_h(H)
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if H.shape[0] != skew_dim(d):
        raise ValueError("H size does not match the dimension of A")
    return vec_to_skew(H @ skew_to_vec(A), d)


def _sym_last_two(T):
    return 0.5 * (T + T.transpose(0, 1, 3, 2))


def cmap_from_pair(P, Q):
    """Coefficient tensor of x -> P x x^T Q^T + Q x x^T P^T for skew P, Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    T = np.einsum("ua,vb->uvab", P, Q) + np.einsum("ua,vb->uvab", Q, P)
    return _sym_last_two(T)


def cmap_from_h(H, d):
    """Coefficient tensor of c_H."""
    H = _check_h(H)
    m = skew_dim(d)
    if H.shape[0] != m:
        raise ValueError(f"H must be {m} x {m} for d = {d}")
    if m == 0:
        return np.zeros((d, d, d, d))
    Ds = skew_basis(d)
    T = np.einsum("pq,pua,qvb->uvab", H, Ds, Ds)
    return _sym_last_two(T)


def cmap_eval(C, x):
    """Evaluate a coefficient tensor at a point: the matrix with entries x^T C[i,j] x."""
    C = np.asarray(C, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.einsum("uvab,a,b->uv", C, x, x)


def trace_form(H, d):
    """Symmetric matrix C with trace(c_H(x)) = x^T C x, computed on coefficients."""
    H = _check_h(H)
    m = skew_dim(d)
    if m == 0:
        return np.zeros((d, d))
    Ds = skew_basis(d)
    # tr(D_p x x^T D_q^T) = x^T D_q^T D_p x
    raw = np.einsum("pq,qau,pav->uv", H, Ds, Ds)
    return 0.5 * (raw + raw.T)


def c_space_basis(d):
    """The explicit spanning family of the tangential coefficient space.

    Six families built from elementary skew matrices S_ab = e_a e_b^T - e_b e_a^T:
    two indexed by increasing 4-tuples, three by increasing triples, and the
    squares S_ab x x^T S_ab^T doubled, for a total of
    2*C(d,4) + 3*C(d,3) + C(d,2) = d^2 (d^2 - 1) / 12 linearly independent maps.
    """
    if d < 2:
        raise ValueError("need d >= 2")

    def S(a, b):
        E = np.zeros((d, d))
        E[a - 1, b - 1] = 1.0
        E[b - 1, a - 1] = -1.0
        return E

    out = []
    for i, j, k, l in combinations(range(1, d + 1), 4):
        out.append(cmap_from_pair(S(i, j), S(k, l)))
        out.append(cmap_from_pair(S(i, k), S(j, l)))
    for i, j, k in combinations(range(1, d + 1), 3):
        out.append(cmap_from_pair(S(i, j), S(i, k)))
        out.append(cmap_from_pair(S(i, j), S(j, k)))
        out.append(cmap_from_pair(S(i, k), S(j, k)))
    for i, j in combinations(range(1, d + 1), 2):
        out.append(cmap_from_pair(S(i, j), S(i, j)))
    return out


def k_matrix(quad, d):
    """The kernel matrix K_(i,j,k,l): vec(A) -> quadratic form 4 * Plucker_(i,j,k,l)(A)."""
    i, j, k, l = quad
    if not (1 <= i < j < k < l <= d):
        raise ValueError(f"quad must be strictly increasing within 1..{d}, got {quad}")
    m = skew_dim(d)
    K = np.zeros((m, m))
    for (a, b), (c, e), sign in (
        ((i, j), (k, l), 1.0),
        ((i, k), (j, l), -1.0),
        ((i, l), (j, k), 1.0),
    ):
        p, q = pi_index(a, b, d) - 1, pi_index(c, e, d) - 1
        K[p, q] = sign
        K[q, p] = sign
    return K


def k_basis(d):
    """Basis of the kernel of H -> c_H, one element per increasing 4-tuple."""
    return [KBasisElement(quad, k_matrix(quad, d)) for quad in combinations(range(1, d + 1), 4)]


@lru_cache(maxsize=None)
def _h_design_matrix(d):
    """Columns: vectorized coefficient tensors of c_E over an orthonormal basis E of S^m.

    The basis is e_p e_p^T on the diagonal and (e_p e_q^T + e_q e_p^T)/sqrt(2)
    off it, so the coordinate 2-norm equals the Frobenius norm of H and the
    minimum-norm least-squares solution is the Frobenius-minimal representative.
    """
    m = skew_dim(d)
    cols = []
    basis = []
    for p in range(m):
        for q in range(p, m):
            E = np.zeros((m, m))
            if p == q:
                E[p, p] = 1.0
            else:
                E[p, q] = E[q, p] = 1.0 / np.sqrt(2.0)
            basis.append(E)
            cols.append(cmap_from_h(E, d).ravel())
    A = np.array(cols).T if cols else np.zeros((d ** 4, 0))
    return A, basis


def h_from_c(C, tol=1e-10):
    """Recover the Frobenius-minimal H with c_H = C (coefficientwise).

    Raises
    ------
    TangencyError
        If C is not in the tangential space; the error carries the residual
        Frobenius distance between C and its best c_H fit.
    """
    C = np.asarray(C, dtype=float)
    d = C.shape[0]
    if C.shape != (d, d, d, d):
        raise ValueError(f"expected a (d, d, d, d) coefficient tensor, got shape {C.shape}")
    A, basis = _h_design_matrix(d)
    target = C.ravel()
    coeffs, _, _, _ = np.linalg.lstsq(A, target, rcond=None)
    H = sum(u * E for u, E in zip(coeffs, basis)) if basis else np.zeros((0, 0))
    residual = np.linalg.norm(A @ coeffs - target)
    scale = max(np.linalg.norm(target), 1.0)
    if residual > tol * scale:
        raise TangencyError(
            f"map is not tangential: best-fit residual {residual:.3e}", residual
        )
    return np.asarray(H)


def c_from_biquadratic(Q, tol=1e-12):
    """Coefficient tensor of c from the quartic tensor of a biquadratic form.

    ``Q`` has shape (2d, 2d, 2d, 2d) and represents the quartic form
    ``BQ(z) = sum Q[i,j,k,l] z_i z_j z_k z_l`` in z = (x, y).  After full
    symmetrization the form must be biquadratic (every monomial of degree two
    in x and two in y); the returned c satisfies y^T c(x) y = BQ(x, y)
    identically.

    Raises ValueError if the form has non-biquadratic components.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if Q.shape != (n, n, n, n) or n % 2 != 0:
        raise ValueError(f"expected a (2d, 2d, 2d, 2d) tensor, got shape {Q.shape}")
    d = n // 2
    sym = np.zeros_like(Q)
    for perm in permutations(range(4)):
        sym += Q.transpose(perm)
    sym /= 24.0

    is_x = np.arange(n) < d
    count_x = (
        is_x[:, None, None, None].astype(int)
        + is_x[None, :, None, None]
        + is_x[None, None, :, None]
        + is_x[None, None, None, :]
    )
    off = np.abs(sym)[count_x != 2].max() if n > 0 else 0.0
    scale = max(np.abs(sym).max(), 1.0)
    if off > tol * scale:
        raise ValueError(f"form is not biquadratic: off-pattern coefficient {off:.3e}")

    # y^T c(x) y = sum c_ab(x) y_a y_b with c_ab(x) = 6 * x^T sym[d+a, d+b] x.
    return np.ascontiguousarray(6.0 * sym[d:, d:, :d, :d])


def h_to_json(H, d):
    """JSON-ready dict {"d": d, "H": [[...]]} for a symmetric m x m matrix."""
    return {"d": int(d), "H": np.asarray(H, dtype=float).tolist()}


def h_from_json(obj):
    """Inverse of :func:`h_to_json`; returns (H, d)."""
    d = int(obj["d"])
    H = np.asarray(obj["H"], dtype=float)
    m = skew_dim(d)
    if m == 0 and H.size == 0:
        H = H.reshape(0, 0)
    if H.shape != (m, m):
        raise ValueError(f"H must be {m} x {m} for d = {d}, got shape {H.shape}")
    return _check_h(H), d


def cmap_to_json(C):
    """JSON-ready dict {"d": d, "c": {"i,j": [[...]]}} carrying the upper triangle."""
    C = np.asarray(C, dtype=float)
    d = C.shape[0]
    comps = {}
    for i in range(d):
        for j in range(i, d):
            comps[f"{i + 1},{j + 1}"] = C[i, j].tolist()
    return {"d": d, "c": comps}


def cmap_from_json(obj):
    """Inverse of :func:`cmap_to_json`."""
    d = int(obj["d"])
    C = np.zeros((d, d, d, d))
    for key, mat in obj["c"].items():
        i, j = (int(t) for t in key.split(","))
        M = np.asarray(mat, dtype=float)
        M = 0.5 * (M + M.T)
        C[i - 1, j - 1] = M
        C[j - 1, i - 1] = M
    return C
