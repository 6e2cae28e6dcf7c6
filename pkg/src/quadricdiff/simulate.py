"""Structure-preserving simulation on the ball and sphere, and Monte Carlo moments.

The tangential part of the dynamics is integrated by a geometric exponential
step ``X <- expm(A_0 h + sum_p A_p dW_p) X``: diagonal Pade approximants of a
skew matrix are exactly orthogonal, so sphere paths keep unit norm to
roundoff.  Ball schemes interleave that rotation with an Euler-Maruyama
radial substep.  Noise is counter-based: each path owns a Philox stream keyed
by (seed, path_id), mapped to Gaussians through the inverse normal CDF, so
ensembles are reproducible and embarrassingly parallel.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .skew import skew_basis

__all__ = [
    "SkewDrive",
    "PathSample",
    "EnsembleResult",
    "MCMoment",
    "TwinPathReport",
    "expm_skew",
    "path_normals",
    "simulate_sphere",
    "simulate_ball",
    "simulate_scalar_ball",
    "sphere_ensemble",
    "ball_ensemble",
    "scalar_ball_ensemble",
    "twin_path_experiment",
    "mc_moment",
    "eval_poly",
]

_BLOCK = 4096
_CLAMP = 1.0 - 1e-15


@dataclass(frozen=True)
class SkewDrive:
    """Drift and diffusion directions (A_0; A_1..A_m), all skew-symmetric."""

    a0: np.ndarray
    diffusion: np.ndarray

    def __post_init__(self):
        a0 = np.asarray(self.a0, dtype=float)
        d = a0.shape[0]
        diff = np.asarray(self.diffusion, dtype=float)
        if diff.size == 0:
            diff = np.zeros((0, d, d))
        if diff.ndim != 3 or diff.shape[1:] != (d, d):
            raise ValueError(f"diffusion must be a (m, {d}, {d}) stack, got {diff.shape}")
        for name, A in (("a0", a0[None]), ("diffusion", diff)):
            if A.size == 0:
                continue
            dev = np.abs(A + A.transpose(0, 2, 1)).max()
            if dev > 1e-12 * (1.0 + np.abs(A).max()):
                raise ValueError(f"{name} is not skew-symmetric (deviation {dev:.2e})")
        object.__setattr__(self, "a0", 0.5 * (a0 - a0.T))
        object.__setattr__(self, "diffusion", 0.5 * (diff - diff.transpose(0, 2, 1)))

    @property
    def d(self):
        return self.a0.shape[0]

    @property
    def n_diffusion(self):
        return self.diffusion.shape[0]

    @classmethod
    def zero(cls, d):
        return cls(np.zeros((d, d)), np.zeros((0, d, d)))

    @classmethod
    def elementary(cls, d, a0=None):
        """Drive whose diffusion directions are all elementary skew matrices."""
        a0 = np.zeros((d, d)) if a0 is None else a0
        return cls(a0, np.array(skew_basis(d)))


@dataclass
class PathSample:
    """One simulated trajectory on a uniform grid."""

    times: np.ndarray
    states: np.ndarray
    seed: int
    scheme: str
    extra: dict = field(default_factory=dict)


@dataclass
class EnsembleResult:
    """Terminal states (and optionally full paths) of an ensemble."""

    times: np.ndarray
    terminal: np.ndarray
    seed: int
    scheme: str
    n_paths: int
    max_norm_dev: float
    max_radius: np.ndarray
    clamp_fraction: float
    paths: np.ndarray = None


@dataclass
class MCMoment:
    estimate: float
    stderr: float
    n: int


@dataclass
class TwinPathReport:
    """Divergence of same-noise path pairs started eps apart."""

    max_divergence: np.ndarray
    eps: float
    kappa_nu_ratio: float
    uniqueness_condition: bool   # kappa/nu^2 > sqrt(2) - 1
    T: float
    h: float


# Pade coefficients and 1-norm thresholds for the scaling-and-squaring
# exponential (degrees 3, 5, 7, 9, 13).
_PADE = {
    3: ([120.0, 60.0, 12.0, 1.0], 1.495585217958292e-2),
    5: ([30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0], 2.539398330063230e-1),
    7: ([17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9.504178996162932e-1),
    9: ([17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
         2162160.0, 110880.0, 3960.0, 90.0, 1.0], 2.097847961257068),
    13: ([64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
          1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
          33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0],
         5.371920351148152),
}


def _solve_gj(A, B):
    """Batched linear solve by Gauss-Jordan with partial pivoting.

    Vectorized over the leading axis with Python loops only over the matrix
    size; much faster than the LAPACK gufunc for stacks of small matrices,
    and each batch element is processed independently of its neighbors.
    """
    n = A.shape[-1]
    N = A.shape[0]
    aug = np.concatenate([A, B], axis=2).copy()
    rows = np.arange(N)
    for k in range(n):
        piv = np.argmax(np.abs(aug[:, k:, k]), axis=1) + k
        swap = piv != k
        if np.any(swap):
            r = rows[swap]
            tmp = aug[r, k, :].copy()
            aug[r, k, :] = aug[r, piv[swap], :]
            aug[r, piv[swap], :] = tmp
        aug[:, k, :] /= aug[:, k, k, None]
        col = aug[:, :, k].copy()
        col[:, k] = 0.0
        aug -= col[:, :, None] * aug[:, k, None, :]
    return aug[:, :, n:]


def _solve_small(A, B):
    """Batched solve specialized by size: cofactor inverse for n <= 3, else pivoting."""
    n = A.shape[-1]
    if n == 1:
        return B / A[:, 0, 0, None, None]
    if n == 2:
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        inv = np.empty_like(A)
        inv[:, 0, 0] = A[:, 1, 1]
        inv[:, 0, 1] = -A[:, 0, 1]
        inv[:, 1, 0] = -A[:, 1, 0]
        inv[:, 1, 1] = A[:, 0, 0]
        return (inv @ B) / det[:, None, None]
    if n == 3:
        a, b, c = A[:, 0, 0], A[:, 0, 1], A[:, 0, 2]
        d, e, f = A[:, 1, 0], A[:, 1, 1], A[:, 1, 2]
        g, h, i = A[:, 2, 0], A[:, 2, 1], A[:, 2, 2]
        co00 = e * i - f * h
        co01 = c * h - b * i
        co02 = b * f - c * e
        co10 = f * g - d * i
        co11 = a * i - c * g
        co12 = c * d - a * f
        co20 = d * h - e * g
        co21 = b * g - a * h
        co22 = a * e - b * d
        det = a * co00 + b * co10 + c * co20
        inv = np.empty_like(A)
        inv[:, 0, 0], inv[:, 0, 1], inv[:, 0, 2] = co00, co01, co02
        inv[:, 1, 0], inv[:, 1, 1], inv[:, 1, 2] = co10, co11, co12
        inv[:, 2, 0], inv[:, 2, 1], inv[:, 2, 2] = co20, co21, co22
        return (inv @ B) / det[:, None, None]
    return _solve_gj(A, B)


def _pade_exp(M, degree, s):
    """Diagonal Pade of the given degree with s squarings, on a (N, n, n) stack."""
    if s:
        M = M / (2.0 ** s)
    n = M.shape[-1]
    b = _PADE[degree][0]
    eye = np.broadcast_to(np.eye(n), M.shape).copy()
    A2 = M @ M
    powers = {0: eye, 2: A2}
    for k in range(4, degree, 2):
        powers[k] = powers[k - 2] @ A2
    V = sum(b[k] * powers[k] for k in range(0, degree + 1, 2))
    U = M @ sum(b[k + 1] * powers[k] for k in range(0, degree, 2))
    if n <= 8:
        R = _solve_small(V - U, V + U)
    else:
        R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def expm_skew(M):
    """Matrix exponential of a stack of matrices by Pade scaling and squaring.

    Accepts shape (..., n, n); degree and scaling are chosen per matrix, so a
    matrix's exponential does not depend on its batch neighbors.  For skew
    inputs the diagonal Pade approximant is exactly orthogonal, so the result
    is orthogonal to roundoff; this is what makes the sphere scheme
    norm-preserving without renormalization.
    """
    M = np.asarray(M, dtype=float)
    single = M.ndim == 2
    if single:
        M = M[None]
    lead = M.shape[:-2]
    n = M.shape[-1]
    flat = M.reshape(-1, n, n)
    norms = np.abs(flat).sum(axis=-2).max(axis=-1)

    theta13 = _PADE[13][1]
    squarings = np.zeros(len(flat), dtype=int)
    over = norms > theta13
    squarings[over] = np.ceil(np.log2(norms[over] / theta13)).astype(int)
    scaled = norms / 2.0 ** squarings
    # Degrees 3 and 7 are folded into 5 and 9: one extra matmul is cheaper
    # than fragmenting the batch into several Pade groups.
    degrees = np.full(len(flat), 13, dtype=int)
    for m in (9, 5):
        degrees[scaled <= _PADE[m][1]] = m

    out = np.empty_like(flat)
    key = degrees * 64 + squarings
    for k in np.unique(key):
        idx = np.nonzero(key == k)[0]
        out[idx] = _pade_exp(flat[idx], int(k) // 64, int(k) % 64)
    out = out.reshape(*lead, n, n)
    return out[0] if single else out


def _rot3_apply(w, X, h_a0vec=None):
    """Rotation substep for d = 3 without forming matrices.

    For a 3x3 skew matrix M with upper entries (a, b, c), Cayley-Hamilton
    gives M^3 = -theta^2 M with theta^2 = a^2 + b^2 + c^2, so the degree-13
    diagonal Pade approximant (with scaling and squaring) collapses to
    R = I + p M + q M^2 for per-matrix scalars p, q.  This is the same
    approximant expm_skew computes, evaluated in O(1) column operations, and
    inherits its exact orthogonality.
    """
    if h_a0vec is not None:
        w = w + h_a0vec
    a, b, c = w[:, 0], w[:, 1], w[:, 2]
    theta2 = a * a + b * b + c * c
    aa, ab, ac = np.abs(a), np.abs(b), np.abs(c)
    norm1 = np.maximum(np.maximum(aa + ab, aa + ac), ab + ac)
    theta13 = _PADE[13][1]
    s = np.zeros(len(w), dtype=int)
    over = norm1 > theta13
    if np.any(over):
        s[over] = np.ceil(np.log2(norm1[over] / theta13)).astype(int)
    x2 = -theta2 / 4.0 ** s
    cf = _PADE[13][0]
    v = cf[2] + x2 * (cf[4] + x2 * (cf[6] + x2 * (cf[8] + x2 * (cf[10] + x2 * cf[12]))))
    wod = cf[3] + x2 * (cf[5] + x2 * (cf[7] + x2 * (cf[9] + x2 * (cf[11] + x2 * cf[13]))))
    u = cf[1] + x2 * wod
    s0 = cf[0] + x2 * v
    det = s0 * s0 - x2 * u * u
    gamma = (u * u - s0 * v) / (cf[0] * det)
    p = 2.0 * u * (1.0 / cf[0] + gamma * x2)
    q = 2.0 * u * (u / det)
    smax = int(s.max()) if len(s) else 0
    for k in range(smax):
        live = s > k
        pl, ql = p[live], q[live]
        p[live] = 2.0 * pl + 2.0 * pl * ql * x2[live]
        q[live] = 2.0 * ql + pl * pl + ql * ql * x2[live]
    if smax:
        p = p * 0.5 ** s
        q = q * 0.25 ** s
    x1c, x2c, x3c = X[:, 0], X[:, 1], X[:, 2]
    m1 = a * x2c + b * x3c
    m2 = -a * x1c + c * x3c
    m3 = -b * x1c - c * x2c
    mm1 = a * m2 + b * m3
    mm2 = -a * m1 + c * m3
    mm3 = -b * m1 - c * m2
    out = np.empty_like(X)
    out[:, 0] = x1c + p * m1 + q * mm1
    out[:, 1] = x2c + p * m2 + q * mm2
    out[:, 2] = x3c + p * m3 + q * mm3
    return out


def path_normals(seed, path_id, n_steps, n_cols):
    """Standard normals for one path: Philox keyed by (seed, path), inverse-CDF mapped."""
    if n_cols == 0:
        return np.zeros((n_steps, 0))
    bg = np.random.Philox(key=[int(seed) % (1 << 64), int(path_id) % (1 << 64)])
    gen = np.random.Generator(bg)
    u = (gen.integers(0, 1 << 53, size=(n_steps, n_cols), dtype=np.int64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def _grid(T, h):
    if not (T > 0 and h > 0):
        raise ValueError("need T > 0 and h > 0")
    n_steps = max(1, int(round(T / h)))
    return n_steps, T / n_steps


def _psd_sqrt(alpha):
    alpha = np.asarray(alpha, dtype=float)
    w, V = np.linalg.eigh(0.5 * (alpha + alpha.T))
    if w[0] < -1e-10 * max(1.0, w[-1]):
        raise ValueError(f"alpha is not positive semidefinite (min eig {w[0]:.2e})")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _run_block(drive, x0s, n_steps, h, seed, path_ids, bhat, Bhat, sqrt_alpha,
               keep_paths):
    """Advance a block of paths; the radial substep runs iff bhat is not None."""
    d = drive.d
    m = drive.n_diffusion
    radial = bhat is not None
    n_cols = m + (d if radial else 0)
    B = len(path_ids)
    noise = np.empty((B, n_steps, n_cols))
    for row, pid in enumerate(path_ids):
        noise[row] = path_normals(seed, pid, n_steps, n_cols)

    X = np.array(x0s, dtype=float)
    paths = np.empty((B, n_steps + 1, d)) if keep_paths else None
    if keep_paths:
        paths[:, 0] = X
    sqh = np.sqrt(h)
    As = drive.diffusion
    rotate = m > 0 or np.abs(drive.a0).max() > 0
    Q_const = expm_skew(drive.a0 * h) if (rotate and m == 0) else None
    scalar3 = rotate and m > 0 and d == 3
    if scalar3:
        from .skew import skew_to_vec

        Avec = np.array([skew_to_vec(A) for A in As])
        h_a0vec = h * skew_to_vec(drive.a0)
        if not h_a0vec.any():
            h_a0vec = None
    norms = np.linalg.norm(X, axis=1)
    max_radius = norms.copy()
    max_norm_dev = np.abs(norms - 1.0).max() if not radial else 0.0
    clamps = 0

    for step in range(n_steps):
        if rotate:
            if m == 0:
                X = X @ Q_const.T
            elif scalar3:
                X = _rot3_apply((noise[:, step, :m] * sqh) @ Avec, X, h_a0vec)
            else:
                dW = noise[:, step, :m] * sqh
                M = np.einsum("bp,pij->bij", dW, As)
                if np.abs(drive.a0).max() > 0:
                    M += drive.a0 * h
                Q = expm_skew(M)
                X = np.einsum("bij,bj->bi", Q, X)
        if radial:
            r2 = np.einsum("bi,bi->b", X, X)
            fac = np.sqrt(np.clip(1.0 - r2, 0.0, None))
            dWr = noise[:, step, m:] * sqh
            X = X + (bhat + X @ Bhat.T) * h + fac[:, None] * (dWr @ sqrt_alpha.T)
            nrm = np.linalg.norm(X, axis=1)
            over = nrm > 1.0
            if np.any(over):
                clamps += int(over.sum())
                X[over] *= (_CLAMP / nrm[over])[:, None]
            np.maximum(max_radius, np.linalg.norm(X, axis=1), out=max_radius)
        else:
            nrm = np.linalg.norm(X, axis=1)
            max_norm_dev = max(max_norm_dev, np.abs(nrm - 1.0).max())
            np.maximum(max_radius, nrm, out=max_radius)
        if keep_paths:
            paths[:, step + 1] = X
    return X, paths, max_radius, max_norm_dev, clamps


def _ensemble(scheme, drive, x0, T, h, seed, n_paths, bhat=None, Bhat=None,
              sqrt_alpha=None, keep_paths=False, extra=None):
    n_steps, h_eff = _grid(T, h)
    d = drive.d
    x0 = np.asarray(x0, dtype=float).reshape(d)
    terminal = np.empty((n_paths, d))
    all_paths = np.empty((n_paths, n_steps + 1, d)) if keep_paths else None
    max_radius = np.empty(n_paths)
    max_norm_dev = 0.0
    clamps = 0
    for start in range(0, n_paths, _BLOCK):
        ids = range(start, min(start + _BLOCK, n_paths))
        x0s = np.tile(x0, (len(ids), 1))
        Xt, paths, mr, dev, cl = _run_block(
            drive, x0s, n_steps, h_eff, seed, ids, bhat, Bhat, sqrt_alpha, keep_paths)
        terminal[ids.start:ids.stop] = Xt
        max_radius[ids.start:ids.stop] = mr
        max_norm_dev = max(max_norm_dev, dev)
        clamps += cl
        if keep_paths:
            all_paths[ids.start:ids.stop] = paths
    return EnsembleResult(
        times=np.linspace(0.0, T, n_steps + 1),
        terminal=terminal,
        seed=seed,
        scheme=scheme,
        n_paths=n_paths,
        max_norm_dev=float(max_norm_dev),
        max_radius=max_radius,
        clamp_fraction=clamps / (n_paths * n_steps),
        paths=all_paths,
    )


def simulate_sphere(drive, x0, T, h, seed, path_id=0):
    """One sphere path of ``dX = (o dY) X`` by geometric exponential steps.

    Requires a unit initial state.  Every stored state keeps unit norm to
    about 1e-12 because each step multiplies by an orthogonal matrix.
    """
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-12:
        raise ValueError(f"|x0| = {np.linalg.norm(x0)} is not 1")
    n_steps, h_eff = _grid(T, h)
    Xt, paths, _, dev, _ = _run_block(
        drive, x0[None], n_steps, h_eff, seed, [path_id], None, None, None, True)
    return PathSample(
        times=np.linspace(0.0, T, n_steps + 1),
        states=paths[0],
        seed=seed,
        scheme="sphere",
        extra={"max_norm_dev": float(dev)},
    )


def sphere_ensemble(drive, x0, T, h, seed, n_paths, keep_paths=False):
    """Ensemble version of :func:`simulate_sphere`."""
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-12:
        raise ValueError(f"|x0| = {np.linalg.norm(x0)} is not 1")
    return _ensemble("sphere", drive, x0, T, h, seed, n_paths, keep_paths=keep_paths)


def _ball_args(bhat, Bhat, alpha, drive, x0):
    d = drive.d
    bhat = np.asarray(bhat, dtype=float).reshape(d)
    Bhat = np.asarray(Bhat, dtype=float)
    Bsym = 0.5 * (Bhat + Bhat.T)
    if np.abs(Bhat - Bsym).max() > 1e-10 * (1.0 + np.abs(Bhat).max()):
        raise ValueError("Bhat must be symmetric; put the skew part into the drive")
    top = float(np.linalg.eigvalsh(Bsym)[-1])
    if top > 1e-12 * max(1.0, np.abs(Bsym).max()):
        raise ValueError(f"Bhat must be negative semidefinite (max eig {top:.2e})")
    x0 = np.asarray(x0, dtype=float).reshape(d)
    if np.linalg.norm(x0) > 1.0 + 1e-12:
        raise ValueError("x0 lies outside the closed unit ball")
    return bhat, Bsym, _psd_sqrt(alpha), x0


def _ito_drift_matrix(drive, Bhat):
    """The linear Ito drift B with (B - B^T)/2 = A_0, (B + B^T)/2 = Bhat + (1/2) sum A_p^2."""
    corr = sum(A @ A for A in drive.diffusion) if drive.n_diffusion else 0.0
    return Bhat + drive.a0 + 0.5 * corr


def simulate_ball(bhat, Bhat, alpha, drive, x0, T, h, seed, path_id=0):
    """One ball path: rotation substep, then Euler-Maruyama radial substep.

    The radial factor is sqrt(max(0, 1 - |X|^2)) and overshooting states are
    pulled back just inside the sphere; the clamp frequency is reported in
    ``extra`` along with the Ito drift matrix equivalent to (Bhat, drive).
    """
    bhat, Bhat, sqa, x0 = _ball_args(bhat, Bhat, alpha, drive, x0)
    n_steps, h_eff = _grid(T, h)
    Xt, paths, _, _, clamps = _run_block(
        drive, x0[None], n_steps, h_eff, seed, [path_id], bhat, Bhat, sqa, True)
    return PathSample(
        times=np.linspace(0.0, T, n_steps + 1),
        states=paths[0],
        seed=seed,
        scheme="ball",
        extra={
            "ito_B": _ito_drift_matrix(drive, Bhat),
            "ito_b": bhat,
            "clamp_fraction": clamps / n_steps,
        },
    )


def ball_ensemble(bhat, Bhat, alpha, drive, x0, T, h, seed, n_paths, keep_paths=False):
    """Ensemble version of :func:`simulate_ball`."""
    bhat, Bhat, sqa, x0 = _ball_args(bhat, Bhat, alpha, drive, x0)
    return _ensemble("ball", drive, x0, T, h, seed, n_paths, bhat=bhat, Bhat=Bhat,
                     sqrt_alpha=sqa, keep_paths=keep_paths)


def simulate_scalar_ball(kappa, nu, drive, x0, T, h, seed, path_id=0):
    """Scalar mean-reverting ball path with tangential rotation.

    Runs :func:`simulate_ball` with Bhat = -kappa Id and alpha = nu^2 Id, and
    additionally returns the path of Y = 1 - |X|^2 together with the
    in-sample residual of its closed drift ``2 kappa |X|^2 - d nu^2 Y``.
    """
    if not (kappa > 0 and nu > 0):
        raise ValueError("kappa and nu must be positive")
    d = drive.d
    sample = simulate_ball(np.zeros(d), -kappa * np.eye(d), nu ** 2 * np.eye(d),
                           drive, x0, T, h, seed, path_id)
    sample.scheme = "scalar"
    r2 = np.einsum("ni,ni->n", sample.states, sample.states)
    y = 1.0 - r2
    h_eff = sample.times[1] - sample.times[0]
    drift = 2.0 * kappa * r2[:-1] - d * nu ** 2 * y[:-1]
    resid = float(np.mean(np.diff(y) - drift * h_eff))
    sample.extra.update({
        "y": y,
        "y_drift_residual": resid,
        "kappa_nu_ratio": kappa / nu ** 2,
    })
    return sample


def scalar_ball_ensemble(kappa, nu, drive, x0, T, h, seed, n_paths, keep_paths=False):
    """Ensemble version of :func:`simulate_scalar_ball` (terminal states and radii)."""
    if not (kappa > 0 and nu > 0):
        raise ValueError("kappa and nu must be positive")
    d = drive.d
    result = ball_ensemble(np.zeros(d), -kappa * np.eye(d), nu ** 2 * np.eye(d),
                           drive, x0, T, h, seed, n_paths, keep_paths)
    result.scheme = "scalar"
    return result


def twin_path_experiment(kappa, nu, drive, x0, T, h, n_seeds, seed=0, eps=0.0):
    """Same-noise path pairs started eps apart, from a boundary point.

    For each of ``n_seeds`` independent noise streams, simulates X from x0 and
    X~ from (1 - eps) x0 with the identical stream and records the largest
    gap sup_t |X_t - X~_t|.  With eps = 0 the pairs coincide bitwise.  The
    report carries the pathwise-uniqueness condition kappa/nu^2 > sqrt(2)-1.
    """
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-12:
        raise ValueError("the twin experiment starts on the boundary: |x0| must be 1")
    if not (kappa > 0 and nu > 0):
        raise ValueError("kappa and nu must be positive")
    d = drive.d
    n_steps, h_eff = _grid(T, h)
    ids = range(n_seeds)
    args = (np.zeros(d), -kappa * np.eye(d), nu ** 2 * np.eye(d))
    bhat, Bhat, sqa, _ = _ball_args(*args, drive, x0)
    _, paths_a, _, _, _ = _run_block(
        drive, np.tile(x0, (n_seeds, 1)), n_steps, h_eff, seed, ids, bhat, Bhat, sqa, True)
    _, paths_b, _, _, _ = _run_block(
        drive, np.tile((1.0 - eps) * x0, (n_seeds, 1)), n_steps, h_eff, seed, ids,
        bhat, Bhat, sqa, True)
    gap = np.linalg.norm(paths_a - paths_b, axis=2).max(axis=1)
    ratio = kappa / nu ** 2
    return TwinPathReport(
        max_divergence=gap,
        eps=eps,
        kappa_nu_ratio=ratio,
        uniqueness_condition=bool(ratio > np.sqrt(2.0) - 1.0),
        T=T,
        h=h_eff,
    )


def eval_poly(q, states):
    """Evaluate an exponent-dict polynomial at each row of ``states``."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    vals = np.zeros(states.shape[0])
    for e, c in q.items():
        term = np.full(states.shape[0], float(c))
        for i, ei in enumerate(e):
            if ei:
                term *= states[:, i] ** ei
        vals += term
    return vals


def mc_moment(states, q):
    """Sample mean and standard error of q(X) over terminal states."""
    vals = eval_poly(q, states)
    n = len(vals)
    est = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return MCMoment(est, stderr, n)
