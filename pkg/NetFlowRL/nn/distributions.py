"""
Dirichlet and Gaussian policy heads.

Samples are drawn with numpy and treated as constants; log-densities and
entropies are built from tape operations so their gradients with respect to
the distribution parameters flow back into the policy.
"""

import numpy as np

from ..exceptions import DomainError
from .autograd import Tensor, as_tensor, digamma_t, lgamma, log

LOG_2PI = float(np.log(2.0 * np.pi))
_SIMPLEX_FLOOR = 1e-12


def _check_alpha(alpha):
    if np.any(~np.isfinite(alpha)) or np.any(alpha <= 0):
        raise DomainError("Dirichlet concentrations must be finite and > 0")


def dirichlet_log_prob(alpha, x):
    """
    ``log Gamma(sum a) - sum log Gamma(a) + sum (a - 1) log x`` over the last axis.

    Args:
        alpha: Tensor of concentrations, shape (k,) or (k, heads) with the
            simplex along axis 0
        x: point(s) on the simplex with the same shape
    """
    alpha = as_tensor(alpha)
    _check_alpha(alpha.data)
    x = np.maximum(np.asarray(x, dtype=float), _SIMPLEX_FLOOR)
    total = lgamma(alpha.sum(axis=0)) - lgamma(alpha).sum(axis=0)
    return (total + ((alpha - 1.0) * Tensor(np.log(x))).sum(axis=0)).sum()


def dirichlet_entropy(alpha):
    alpha = as_tensor(alpha)
    _check_alpha(alpha.data)
    k = alpha.shape[0]
    a0 = alpha.sum(axis=0)
    log_b = lgamma(alpha).sum(axis=0) - lgamma(a0)
    return (log_b + (a0 - float(k)) * digamma_t(a0) - ((alpha - 1.0) * digamma_t(alpha)).sum(axis=0)).sum()


def dirichlet_sample(alpha, rng):
    """Normalised Gamma draws, one simplex point per column."""
    a = np.asarray(alpha.data if isinstance(alpha, Tensor) else alpha, dtype=float)
    _check_alpha(a)
    g = rng.gamma(a)
    s = g.sum(axis=0, keepdims=True)
    # all draws can underflow for tiny concentrations; fall back to the mean
    return np.where(s > 0, g / np.where(s > 0, s, 1.0), a / a.sum(axis=0, keepdims=True))


def dirichlet_sample_logprob(alpha, rng):
    """
    Sample a simplex point and score it.

    Returns:
        tuple: (sample array, log-density Tensor)
    """
    x = dirichlet_sample(alpha, rng)
    return x, dirichlet_log_prob(alpha, x)


def _check_sigma(sigma):
    if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
        raise DomainError("Gaussian scale must be finite and > 0")


def gaussian_log_prob(mu, sigma, x):
    mu, sigma = as_tensor(mu), as_tensor(sigma)
    _check_sigma(sigma.data)
    z = (Tensor(np.asarray(x, dtype=float)) - mu) / sigma
    return (-0.5 * z * z - log(sigma) - 0.5 * LOG_2PI).sum()


def gaussian_entropy(sigma):
    sigma = as_tensor(sigma)
    _check_sigma(sigma.data)
    return (log(sigma) + 0.5 * (LOG_2PI + 1.0)).sum()


def gaussian_sample_logprob(mu, sigma, rng):
    """
    Reparameterised draw ``mu + sigma * eps`` and its log-density.

    The density is that of the unrounded value; see ``round_production``.
    """
    mu_a = np.asarray(mu.data if isinstance(mu, Tensor) else mu, dtype=float)
    sigma_a = np.asarray(sigma.data if isinstance(sigma, Tensor) else sigma, dtype=float)
    _check_sigma(sigma_a)
    x = mu_a + sigma_a * rng.standard_normal(mu_a.shape)
    return x, gaussian_log_prob(mu, sigma, x)


def round_production(x):
    """Round production draws to non-negative integers."""
    return np.maximum(np.round(np.asarray(x, dtype=float)), 0.0)
