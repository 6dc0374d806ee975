"""Propagators for ``psi(t) = exp(-i H t) psi0`` with a real symmetric ``H``.

``lanczos_propagate`` is the production path: short Krylov steps of at most
``max_step`` with the subspace grown until the a posteriori error estimate
``beta_m |e_m^T exp(-i T t) e_1|`` drops below ``tol``.  ``rk4_propagate`` is a
fixed-step fallback and ``dense_propagate`` an eigendecomposition oracle for
small dimensions.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import DomainError, IntegrationError

BREAKDOWN = 1e-13


def _lanczos_basis(matvec, v, t_eval, tol, m_max, m_check):
    """Krylov basis of ``v`` sized so ``exp(-i H t) v`` converges for all ``t_eval``."""
    N = v.size
    m_max = min(m_max, N)
    V = np.empty((m_max, N), dtype=complex)
    V[0] = v
    alpha = np.empty(m_max)
    beta = np.empty(m_max)
    t_eval = np.asarray(t_eval)
    for j in range(m_max):
        w = matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w -= alpha[j] * V[j]
        if j > 0:
            w -= beta[j - 1] * V[j - 1]
        # one full reorthogonalisation pass keeps the short basis orthonormal
        w -= V[: j + 1].T @ (V[: j + 1] @ w.conj()).conj()
        b = np.linalg.norm(w)
        m = j + 1
        last = m == m_max or b < BREAKDOWN
        if last or m >= m_check:
            theta, Q = eigh_tridiagonal(alpha[:m], beta[: m - 1]) if m > 1 else (alpha[:1], np.ones((1, 1)))
            phases = np.exp(-1j * np.outer(t_eval, theta))  # (T, m)
            coeffs = (phases * Q[0]) @ Q.T  # (T, m) rows are exp(-i T t) e1
            if b < BREAKDOWN or b * np.max(np.abs(coeffs[:, -1])) < tol:
                return V[:m], coeffs, m
            if last:
                raise IntegrationError(
                    f"Krylov step did not converge in {m_max} vectors; reduce max_step"
                )
        beta[j] = b
        V[j + 1] = w / b


def lanczos_propagate(matvec, psi0, times, max_step=0.1, tol=1e-12, m_max=60, m_check=6):
    """Yield ``(t, psi(t))`` for every ``t`` in the ascending array ``times``.

    Sample times falling inside one Krylov step are evaluated from the same
    basis.  Each step starts from the current state, so the norm is carried
    exactly up to the orthogonality of the basis.
    """
    times = np.asarray(times, dtype=float)
    psi = np.array(psi0, dtype=complex)
    t_now = 0.0
    i = 0
    m_guess = m_check
    while i < times.size and times[i] <= t_now:
        yield times[i], psi.copy()
        i += 1
    while i < times.size:
        t_stop = min(t_now + max_step, times[-1])
        j = np.searchsorted(times, t_stop, side="right")
        local = np.concatenate([times[i:j], [t_stop]]) - t_now
        nrm = np.linalg.norm(psi)
        # start testing convergence just below the size the last step needed
        V, coeffs, m_used = _lanczos_basis(matvec, psi / nrm, local, tol, m_max, m_guess)
        m_guess = max(m_check, m_used - 1)
        out = nrm * (coeffs @ V)
        for k in range(j - i):
            yield times[i + k], out[k]
        psi = out[-1]
        t_now = t_stop
        i = j


def rk4_propagate(matvec, psi0, times, max_step=0.01):
    """Classical fixed-step RK4 on ``dpsi/dt = -i H psi``, landing on every sample."""
    times = np.asarray(times, dtype=float)
    psi = np.array(psi0, dtype=complex)
    t_now = 0.0

    def f(x):
        return -1j * matvec(x)

    for t in times:
        span = t - t_now
        if span > 0:
            steps = int(np.ceil(span / max_step - 1e-12))
            h = span / steps
            for _ in range(steps):
                k1 = f(psi)
                k2 = f(psi + 0.5 * h * k1)
                k3 = f(psi + 0.5 * h * k2)
                k4 = f(psi + h * k3)
                psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t_now = t
        yield t, psi.copy()


def dense_propagate(H, psi0, times):
    """Eigendecomposition reference: ``U exp(-i E t) U^T psi0`` for each time."""
    dense = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
    if dense.shape[0] > 5000:
        raise DomainError(f"dense propagation of dimension {dense.shape[0]} refused")
    E, U = np.linalg.eigh(dense)
    c0 = U.T @ np.asarray(psi0, dtype=complex)
    return np.array([U @ (np.exp(-1j * E * t) * c0) for t in np.asarray(times, dtype=float)])
