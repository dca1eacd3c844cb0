"""Pure numpy implementations of the hot inner loops.

Semantics match ``_core`` (the compiled extension) operation for operation;
the compiled module only removes interpreter overhead. Keep the two in
lockstep when changing either.
"""

import numpy as np


def mm_inner(Q, q, p0, n_t, n_users, lam, row_target, tol, max_iters):
    """Minimize p^H Q p - 2 Re{p^H q} over fixed per-antenna row norms.

    Each step majorizes the quadratic at the current point with lam * I
    (lam >= max eigenvalue of Q) and solves the resulting linear problem in
    closed form: every antenna row of the matrix form of
    qhat = q - (Q - lam I) p is rescaled to ``row_target``. A zero row keeps
    its previous value and is counted in ``degenerate``.

    Returns (p, f_history, n_iters, converged, degenerate) where f_history
    holds the quadratic objective at every visited iterate (length
    n_iters + 1).
    """
    Q = np.ascontiguousarray(Q, dtype=complex)
    q = np.asarray(q, dtype=complex)
    p = np.array(p0, dtype=complex)
    f_hist = np.empty(max_iters + 1)
    n_iters = 0
    converged = False
    degenerate = 0
    for it in range(1, max_iters + 1):
        y = Q @ p
        f_hist[it - 1] = np.real(np.vdot(p, y)) - 2.0 * np.real(np.vdot(p, q))
        qhat = q - y + lam * p
        rows = qhat.reshape(n_users, n_t)
        norms = np.sqrt(np.sum(np.abs(rows) ** 2, axis=0))
        zero = norms == 0.0
        if zero.any():
            degenerate += int(zero.sum())
            prev = p.reshape(n_users, n_t)
            rows = rows.copy()
            rows[:, zero] = prev[:, zero]
            norms = np.where(zero, row_target, norms)
        p_next = (rows * (row_target / norms)).reshape(-1)
        delta = np.linalg.norm(p_next - p)
        p = p_next
        n_iters = it
        if delta <= tol:
            converged = True
            break
    f_hist[n_iters] = (np.real(np.vdot(p, Q @ p))
                       - 2.0 * np.real(np.vdot(p, q)))
    return p, f_hist[:n_iters + 1].copy(), n_iters, converged, degenerate


def _psd_project(a):
    w, v = np.linalg.eigh(a)
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def admm_linear_fixed_diag(B, diag_value, penalty, tol, max_iters, Y0, U0):
    """min tr(B X) over Hermitian X with fixed diagonal and X >= 0.

    Operator splitting: the X block pins the diagonal, the Y block projects
    onto the PSD cone, U is the scaled dual. Y0/U0 allow warm starts. The
    penalty is rebalanced every 50 iterations (factor 2 when one residual
    exceeds 5x the other, capped at 1e6x the initial value); per-iteration
    rebalancing limit-cycles on this linear objective while a stuck dual
    residual needs the occasional kick. Returns (X, Y, U, n_iters,
    primal_res, dual_res, converged).
    """
    n = B.shape[0]
    Y = np.array(Y0, dtype=complex)
    U = np.array(U0, dtype=complex)
    X = Y.copy()
    r = s = 0.0
    converged = False
    n_iters = 0
    tau = penalty
    for it in range(1, max_iters + 1):
        X = Y - U - B / tau
        np.fill_diagonal(X, diag_value)
        Y_prev = Y
        Y = _psd_project(X + U)
        U = U + X - Y
        r = float(np.linalg.norm(X - Y))
        s = tau * float(np.linalg.norm(Y - Y_prev))
        n_iters = it
        eps_pri = tol * max(1.0, float(np.linalg.norm(X)),
                            float(np.linalg.norm(Y)))
        eps_dual = tol * max(1.0, tau * float(np.linalg.norm(U)))
        if r <= eps_pri and s <= eps_dual:
            converged = True
            break
        if it % 50 == 0:
            if r > 5.0 * s and tau < 1e6 * penalty:
                tau *= 2.0
                U = U / 2.0
            elif s > 5.0 * r and tau > 1e-6 * penalty:
                tau /= 2.0
                U = U * 2.0
    return X, Y, U, n_iters, r, s, converged
