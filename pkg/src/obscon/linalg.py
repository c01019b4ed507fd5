"""Small dense linear algebra: cyclic Jacobi for Hermitian matrices, power-iteration norms."""
from __future__ import annotations

import numpy as np

from .errors import NumericalFailure


def jacobi_eigh(a, tol=1e-10, max_sweeps=60):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix by cyclic Jacobi.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal unitary,
    then applies the real symmetric Schur rotation. Sweeps stop once the
    off-diagonal Frobenius norm is below ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix expected")
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a) or 1.0
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                # make a[p, q] real and positive
                a[q, :] *= phase
                a[:, q] *= np.conj(phase)
                v[:, q] *= np.conj(phase)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau         # tau^2 would overflow; t ~ 1 / (2 tau)
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * ap - s * aq, s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        raise NumericalFailure(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def jacobi_eigvalsh(a, tol=1e-10):
    return jacobi_eigh(a, tol)[0]


def spectral_norm(a, rtol=1e-8, max_iter=10_000, seed=0):
    """Largest singular value of ``a`` by power iteration on ``a^H a``."""
    a = np.asarray(a)
    if a.size == 0 or not np.any(a):
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    for _ in range(max_iter):
        y = a.conj().T @ (a @ x)
        lam = float(np.real(np.vdot(x, y)))   # Rayleigh quotient, error ~ residual^2
        if lam <= 0.0:
            return 0.0
        resid = np.linalg.norm(y - lam * x)
        if resid <= rtol * lam:
            return float(np.sqrt(lam))
        x = y / np.linalg.norm(y)
    raise NumericalFailure("power iteration for the spectral norm did not converge")
