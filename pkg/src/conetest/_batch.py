"""Vectorized Monte-Carlo kernels (internal).

These kernels replicate the scalar classification and statistic code paths
across many draws at once.  Randomness comes from counter-based Philox
substreams keyed by ``(seed, stream index)``, so a computation split into
fixed-size chunks gives identical results regardless of how many workers
process the chunks.
"""

from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from .exceptions import DegenerateBoundaryError

DEFAULT_CHUNK = 16384


def substream(seed, key):
    """Independent generator for one stream of a seeded family.

    ``key`` is an int or tuple of ints; distinct keys give independent
    counter-based streams for the same seed.
    """
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    else:
        key = tuple(int(k) for k in key)
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def chunk_sizes(total, chunk):
    """Fixed partition of ``total`` draws into chunks (worker independent)."""
    out = [chunk] * (total // chunk)
    if total % chunk:
        out.append(total % chunk)
    return out


def run_chunks(worker, n_chunks, workers=1):
    """Evaluate ``worker(i)`` for each chunk index, preserving chunk order."""
    if workers <= 1 or n_chunks <= 1:
        return [worker(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(worker, range(n_chunks)))


def sample_mean_cov(rng, theta, chol_sigma, n, reps):
    """Means and unbiased covariances of ``reps`` normal samples of size ``n``.

    ``chol_sigma`` may be a single (p, p) factor or a (reps, p, p) stack of
    per-draw factors.
    """
    p = chol_sigma.shape[-1]
    z = rng.standard_normal((reps, n, p))
    if chol_sigma.ndim == 2:
        x = z @ chol_sigma.T
    else:
        x = np.einsum("rij,rkj->rik", z, chol_sigma)
    if theta is not None:
        x = x + theta
    means = x.mean(axis=1)
    centered = x - means[:, None, :]
    covs = np.einsum("rij,rik->rjk", centered, centered) / (n - 1)
    return means, covs


def _solve_vec(mats, vecs):
    return np.linalg.solve(mats, vecs[..., None])[..., 0]


def batch_t2(means, covs, n):
    """``n xbar' S^{-1} xbar`` per draw."""
    y = np.sqrt(n) * means
    return np.einsum("ri,ri->r", y, _solve_vec(covs, y))


def batch_orthant(means, covs, n):
    """Orthant projection decomposition per draw.

    Returns ``(sizes, q_proj, q_res)`` where ``sizes`` is the active-subset
    cardinality, ``q_proj`` the squared projection norm of ``sqrt(n) xbar``
    and ``q_res`` the squared residual norm.  Raises
    :class:`DegenerateBoundaryError` if any draw matches zero or multiple
    subsets (a probability-zero tie).
    """
    reps, p = means.shape
    y = np.sqrt(n) * means
    t2 = batch_t2(means, covs, n)
    sizes = np.full(reps, -1, dtype=np.int64)
    q_proj = np.zeros(reps)
    matches = np.zeros(reps, dtype=np.int64)
    fixed_cov = covs.ndim == 2
    for k in range(p + 1):
        for a in combinations(range(p), k):
            ac = tuple(i for i in range(p) if i not in a)
            if not ac:
                cond = np.all(y > 0.0, axis=1)
                qf = t2
            else:
                if fixed_cov:
                    s_cc = covs[np.ix_(ac, ac)]
                    sol = np.linalg.solve(s_cc, y[:, ac].T).T
                else:
                    s_cc = covs[:, ac, :][:, :, ac]
                    sol = _solve_vec(s_cc, y[:, ac])
                cond = np.all(sol <= 0.0, axis=1)
                if a:
                    if fixed_cov:
                        s_ac = covs[np.ix_(a, ac)]
                        adj = y[:, a] - sol @ s_ac.T
                        s_cond = covs[np.ix_(a, a)] - s_ac @ np.linalg.solve(
                            s_cc, s_ac.T
                        )
                        qf = np.einsum(
                            "ri,ri->r", adj, np.linalg.solve(s_cond, adj.T).T
                        )
                    else:
                        s_ac = covs[:, a, :][:, :, ac]
                        adj = y[:, a] - np.einsum("rij,rj->ri", s_ac, sol)
                        cross = np.linalg.solve(s_cc, np.swapaxes(s_ac, 1, 2))
                        s_cond = covs[:, a, :][:, :, a] - np.einsum(
                            "rij,rjk->rik", s_ac, cross
                        )
                        qf = np.einsum("ri,ri->r", adj, _solve_vec(s_cond, adj))
                    cond = cond & np.all(adj > 0.0, axis=1)
                else:
                    qf = np.zeros(reps)
            sizes = np.where(cond, k, sizes)
            q_proj = np.where(cond, qf, q_proj)
            matches += cond
    if np.any(matches != 1):
        bad = int(np.flatnonzero(matches != 1)[0])
        raise DegenerateBoundaryError(
            f"draw {bad} matched {int(matches[bad])} subsets; expected exactly one"
        )
    q_res = np.maximum(t2 - q_proj, 0.0)
    return sizes, q_proj, q_res


def batch_halfspace(means, covs, n):
    """Halfspace projection decomposition per draw: ``(q_proj, q_res)``."""
    reps, p = means.shape
    y = np.sqrt(n) * means
    t2 = batch_t2(means, covs, n)
    upper = y[:, -1] > 0.0
    s_pp = covs[..., -1, -1]
    q_res_low = y[:, -1] ** 2 / s_pp
    q_proj = np.where(upper, t2, np.maximum(t2 - q_res_low, 0.0))
    q_res = np.where(upper, 0.0, q_res_low)
    return q_proj, q_res


def batch_fuit_max_t(means, covs, n):
    """Largest coordinatewise one-sided t statistic per draw."""
    diag = np.diagonal(covs, axis1=-2, axis2=-1)
    return np.max(np.sqrt(n) * means / np.sqrt(diag), axis=1)


def batch_active_sizes_fixed_cov(z, sigma):
    """Active-subset cardinalities for draws ``z`` under a fixed matrix.

    Classification matrices are precomputed per subset, so the cost per
    subset is two small matrix products over all draws.
    """
    reps, p = z.shape
    sizes = np.full(reps, -1, dtype=np.int64)
    matches = np.zeros(reps, dtype=np.int64)
    for k in range(p + 1):
        for a in combinations(range(p), k):
            ac = tuple(i for i in range(p) if i not in a)
            if not ac:
                cond = np.all(z > 0.0, axis=1)
            else:
                s_cc = sigma[np.ix_(ac, ac)]
                sol = np.linalg.solve(s_cc, z[:, ac].T).T
                cond = np.all(sol <= 0.0, axis=1)
                if a:
                    adj = z[:, a] - sol @ sigma[np.ix_(a, ac)].T
                    cond = cond & np.all(adj > 0.0, axis=1)
            sizes = np.where(cond, k, sizes)
            matches += cond
    if np.any(matches != 1):
        bad = int(np.flatnonzero(matches != 1)[0])
        raise DegenerateBoundaryError(
            f"draw {bad} matched {int(matches[bad])} subsets; expected exactly one"
        )
    return sizes


def sample_invwishart_chol(rng, scale, df, reps):
    """Cholesky-like factors of inverse-Wishart draws.

    Draws ``W ~ Wishart(scale^{-1}, df)`` by the Bartlett construction and
    returns upper-triangular factors ``F`` with ``F F' = W^{-1}``, i.e.
    factors of inverse-Wishart matrices with the given scale; proper for
    ``df > p - 1``.
    """
    p = scale.shape[0]
    chol_inv_scale = np.linalg.cholesky(np.linalg.inv(scale))
    bart = np.zeros((reps, p, p))
    tril = np.tril_indices(p, k=-1)
    if tril[0].size:
        bart[:, tril[0], tril[1]] = rng.standard_normal((reps, tril[0].size))
    dfs = df - np.arange(p)
    for i in range(p):
        bart[:, i, i] = np.sqrt(rng.chisquare(dfs[i], size=reps))
    c = chol_inv_scale @ bart  # (reps, p, p), lower triangular, C C' = W
    return np.swapaxes(np.linalg.inv(c), 1, 2)  # F = C^{-T}, F F' = W^{-1}
