"""Monomial bases, generator matrices, and exact conditional moments.

A polynomial diffusion's generator ``G f = tr(a grad^2 f)/2 + b . grad f``
maps polynomials of degree at most k to themselves, so on a fixed monomial
basis it is a finite matrix G_k, and conditional moments reduce to
``H(x)^T expm(t G_k) q``.  All polynomial arithmetic here is exact
multiply-and-collect over exponent-key dictionaries; coefficients are only
ever combined at identical exponents, never nearest-matched.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from scipy.linalg import expm

from .cspace import cmap_from_h

__all__ = [
    "MonomialBasis",
    "GeneratorMatrix",
    "monomial_basis",
    "apply_generator",
    "build_Gk",
    "moment",
    "poly_to_json",
    "poly_from_json",
    "poly_degree",
]


@dataclass(frozen=True)
class MonomialBasis:
    """Graded-lexicographic monomial basis of polynomials of degree <= k in d variables."""

    d: int
    k: int
    exponents: tuple

    def __len__(self):
        return len(self.exponents)

    def index(self, exponent):
        return self._lookup[tuple(exponent)]

    @property
    def _lookup(self):
        if "_cache" not in self.__dict__:
            object.__setattr__(self, "_cache", {e: i for i, e in enumerate(self.exponents)})
        return self.__dict__["_cache"]

    def eval_at(self, x):
        """Vector of all basis monomials at the point x."""
        x = np.asarray(x, dtype=float)
        out = np.empty(len(self.exponents))
        for i, e in enumerate(self.exponents):
            v = 1.0
            for xi, ei in zip(x, e):
                if ei:
                    v *= xi ** ei
            out[i] = v
        return out

    def vector(self, poly):
        """Coefficient vector of an exponent-dict polynomial on this basis."""
        vec = np.zeros(len(self.exponents))
        for e, c in poly.items():
            vec[self.index(e)] = c
        return vec


@dataclass(frozen=True)
class GeneratorMatrix:
    """Matrix of the generator restricted to polynomials of degree <= k."""

    basis: MonomialBasis
    G: np.ndarray


def monomial_basis(d, k):
    """All exponent multi-indices with degree <= k, graded lexicographically.

    The constant monomial comes first; within each degree the variables are
    ordered x1 before x2 and so on.  The basis has C(d + k, k) elements.
    """
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    exps = []
    for deg in range(k + 1):
        level = []
        for combo in combinations_with_replacement(range(d), deg):
            e = [0] * d
            for idx in combo:
                e[idx] += 1
            level.append(tuple(e))
        level.sort(key=lambda e: tuple(-ei for ei in e))
        exps.extend(level)
    basis = MonomialBasis(d, k, tuple(exps))
    assert len(basis) == comb(d + k, k)
    return basis


def _poly_add(acc, poly, scale=1.0):
    for e, c in poly.items():
        acc[e] = acc.get(e, 0.0) + scale * c
        if acc[e] == 0.0:
            del acc[e]


def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0.0}


def poly_degree(poly):
    """Total degree of an exponent-dict polynomial (zero polynomial has degree 0)."""
    return max((sum(e) for e in poly), default=0)


def _coefficient_polys(model):
    """Quadratic a_ij and affine b_i of a model as exponent-dict polynomials."""
    d = model.d
    zero = tuple([0] * d)

    def unit(i):
        e = [0] * d
        e[i] = 1
        return tuple(e)

    def quad(i, j):
        e = [0] * d
        e[i] += 1
        e[j] += 1
        return tuple(e)

    C = cmap_from_h(model.H, d)
    a_polys = [[dict() for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            p = {}
            M = C[i, j]
            for u in range(d):
                if M[u, u] != 0.0:
                    p[quad(u, u)] = M[u, u]
                for v in range(u + 1, d):
                    if M[u, v] != 0.0:
                        p[quad(u, v)] = 2.0 * M[u, v]
            if model.space == "ball":
                alpha_ij = float(model.alpha[i, j])
                if alpha_ij != 0.0:
                    p[zero] = p.get(zero, 0.0) + alpha_ij
                    for u in range(d):
                        p[quad(u, u)] = p.get(quad(u, u), 0.0) - alpha_ij
            a_polys[i][j] = {e: c for e, c in p.items() if c != 0.0}

    b_polys = []
    for i in range(d):
        p = {}
        if model.space == "ball" and model.b[i] != 0.0:
            p[zero] = float(model.b[i])
        for j in range(d):
            if model.B[i, j] != 0.0:
                p[unit(j)] = float(model.B[i, j])
        b_polys.append(p)
    return a_polys, b_polys


def _monomial_diff(exponent, i):
    """(coefficient, exponent) of the i-th partial derivative of a monomial."""
    if exponent[i] == 0:
        return 0.0, exponent
    e = list(exponent)
    e[i] -= 1
    return float(exponent[i]), tuple(e)


def apply_generator(model, exponent, as_dict=False):
    """Apply the generator to a monomial, exactly.

    Returns the coefficient vector of the image on the monomial basis of the
    same degree, or the raw exponent-dict when ``as_dict`` is true.  The image
    degree never exceeds the input degree because the quadratic part of a(x)
    is tangential and the drift is affine.
    """
    exponent = tuple(int(e) for e in exponent)
    d = model.d
    if len(exponent) != d:
        raise ValueError(f"exponent length {len(exponent)} does not match d = {d}")
    a_polys, b_polys = _coefficient_polys(model)
    out = {}
    # 1/2 sum a_ij d_i d_j f
    for i in range(d):
        ci, ei = _monomial_diff(exponent, i)
        if ci == 0.0:
            continue
        for j in range(d):
            cj, eij = _monomial_diff(ei, j)
            if cj == 0.0 or not a_polys[i][j]:
                continue
            _poly_add(out, _poly_mul({eij: 0.5 * ci * cj}, a_polys[i][j]))
    # b . grad f
    for i in range(d):
        ci, ei = _monomial_diff(exponent, i)
        if ci == 0.0 or not b_polys[i]:
            continue
        _poly_add(out, _poly_mul({ei: ci}, b_polys[i]))
    if as_dict:
        return out
    return monomial_basis(d, sum(exponent)).vector(out)


def build_Gk(model, k):
    """Generator matrix on the degree <= k monomial basis; columns are exact images."""
    basis = monomial_basis(model.d, k)
    n = len(basis)
    G = np.zeros((n, n))
    a_polys, b_polys = _coefficient_polys(model)
    d = model.d
    for col, exponent in enumerate(basis.exponents):
        out = {}
        for i in range(d):
            ci, ei = _monomial_diff(exponent, i)
            if ci == 0.0:
                continue
            for j in range(d):
                cj, eij = _monomial_diff(ei, j)
                if cj != 0.0 and a_polys[i][j]:
                    _poly_add(out, _poly_mul({eij: 0.5 * ci * cj}, a_polys[i][j]))
            if b_polys[i]:
                _poly_add(out, _poly_mul({ei: ci}, b_polys[i]))
        for e, c in out.items():
            G[basis.index(e), col] = c
    return GeneratorMatrix(basis, G)


def _as_poly_dict(q, d):
    if isinstance(q, dict):
        return {tuple(int(v) for v in e): float(c) for e, c in q.items()}
    raise TypeError("polynomials are exponent-dicts; use poly_from_json for the JSON form")


def moment(model, q, x, t, k=None, gk=None):
    """Conditional moment E[q(X_t) | X_0 = x] via the matrix exponential.

    ``q`` is an exponent-dict polynomial.  ``k`` defaults to deg q; passing a
    smaller k is an error rather than a silent truncation.  A prebuilt
    GeneratorMatrix can be supplied to amortize construction.

    Raises ValueError for x outside the state space, t < 0, or deg q > k.
    """
    d = model.d
    q = _as_poly_dict(q, d)
    deg = max((sum(e) for e in q), default=0)
    if k is None:
        k = deg if gk is None else gk.basis.k
    if deg > k:
        raise ValueError(f"polynomial degree {deg} exceeds k = {k}")
    if t < 0:
        raise ValueError("time must be nonnegative")
    x = np.asarray(x, dtype=float).reshape(d)
    r = float(np.linalg.norm(x))
    if model.space == "ball" and r > 1.0 + 1e-9:
        raise ValueError(f"|x| = {r} lies outside the closed unit ball")
    if model.space == "sphere" and abs(r - 1.0) > 1e-9:
        raise ValueError(f"|x| = {r} does not lie on the unit sphere")
    if gk is None:
        gk = build_Gk(model, k)
    elif gk.basis.k < deg:
        raise ValueError("prebuilt generator matrix has too small a degree bound")
    qvec = gk.basis.vector(q)
    w = expm(t * gk.G) @ qvec
    return float(gk.basis.eval_at(x) @ w)


def poly_to_json(q):
    """{"terms": [{"exp": [...], "coef": c}]} form of an exponent-dict polynomial."""
    return {"terms": [{"exp": list(e), "coef": float(c)} for e, c in sorted(q.items())]}


def poly_from_json(obj):
    """Inverse of :func:`poly_to_json`."""
    out = {}
    for term in obj["terms"]:
        e = tuple(int(v) for v in term["exp"])
        out[e] = out.get(e, 0.0) + float(term["coef"])
    return out
