"""Compiled inner loops for the Kalman filter variants.

Both kernels fill preallocated output arrays and return
``(loglik, n_observed, failed_period)``; ``failed_period`` is the 1-based
period where the innovation covariance could not be factorized, or -1.
"""
import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def _chol(A):
    k = A.shape[0]
    L = np.zeros((k, k))
    for j in range(k):
        s = A[j, j]
        for q in range(j):
            s -= L[j, q] * L[j, q]
        if not s > 0.0 or not np.isfinite(s):
            return L, False
        L[j, j] = math.sqrt(s)
        for i in range(j + 1, k):
            s = A[i, j]
            for q in range(j):
                s -= L[i, q] * L[j, q]
            L[i, j] = s / L[j, j]
    return L, True


@njit(cache=True)
def _lower_inverse(L):
    k = L.shape[0]
    X = np.zeros((k, k))
    for c in range(k):
        for i in range(c, k):
            s = 1.0 if i == c else 0.0
            for q in range(c, i):
                s -= L[i, q] * X[q, c]
            X[i, c] = s / L[i, i]
    return X


@njit(cache=True)
def _sym(M):
    return 0.5 * (M + M.T)


@njit(cache=True)
def _observed(mask_row):
    k = 0
    for j in range(mask_row.shape[0]):
        if not mask_row[j]:
            k += 1
    idx = np.empty(k, np.int64)
    k = 0
    for j in range(mask_row.shape[0]):
        if not mask_row[j]:
            idx[k] = j
            k += 1
    return idx


@njit(cache=True)
def standard_filter(y, mask, Zs, T, RQR, H, a1, P1, can_freeze, freeze_tol,
                    a_out, P_out, att_out, Ptt_out, v_out, F_out, K_out, Finv_out):
    n, p = y.shape
    tv = Zs.shape[0] > 1
    a = a1.copy()
    P = P1.copy()
    ll = 0.0
    n_obs = 0
    frozen = False
    K_last = np.zeros((T.shape[0], p))
    Finv_last = np.zeros((p, p))
    logdet_last = 0.0
    for t in range(n):
        a_out[t] = a
        P_out[t] = P
        Zt = Zs[t] if tv else Zs[0]
        idx = _observed(mask[t])
        po = idx.shape[0]
        full = po == p
        if not full:
            frozen = False

        if frozen:
            v = y[t] - Zt @ a
            att = a + K_last @ v
            att_out[t] = att
            Ptt_out[t] = Ptt_out[t - 1]
            F_out[t] = F_out[t - 1]
            v_out[t] = v
            K_out[t] = K_last
            Finv_out[t] = Finv_last
            ll -= 0.5 * (p * LOG_2PI + logdet_last + v @ (Finv_last @ v))
            n_obs += p
            a = T @ att
            continue

        F = _sym(Zt @ P @ Zt.T + H)
        F_out[t] = F
        if po > 0:
            Zo = Zt[idx]
            Fo = F[idx][:, idx]
            L, ok = _chol(Fo)
            if not ok:
                return ll, n_obs, t + 1
            Li = _lower_inverse(L)
            Finv = Li.T @ Li
            PZ = P @ Zo.T
            K = PZ @ Finv
            v = y[t][idx] - Zo @ a
            logdet = 0.0
            for j in range(po):
                logdet += 2.0 * math.log(L[j, j])
            ll -= 0.5 * (po * LOG_2PI + logdet + v @ (Finv @ v))
            n_obs += po
            att = a + K @ v
            Ptt = _sym(P - K @ PZ.T)
            for j in range(po):
                v_out[t, idx[j]] = v[j]
                K_out[t, :, idx[j]] = K[:, j]
                for q in range(po):
                    Finv_out[t, idx[j], idx[q]] = Finv[j, q]
            if full:
                K_last = K
                Finv_last = Finv
                logdet_last = logdet
        else:
            att = a
            Ptt = P
        att_out[t] = att
        Ptt_out[t] = Ptt
        a = T @ att
        P_next = _sym(T @ Ptt @ T.T + RQR)
        if can_freeze and full:
            frozen = np.abs(P_next - P).max() < freeze_tol * (1.0 + np.abs(P).max())
            if frozen:
                P_next = P
        P = P_next
    a_out[n] = a
    P_out[n] = P
    return ll, n_obs, -1


@njit(cache=True)
def _lower_from_rows(A):
    # L lower triangular with L @ L.T == A @ A.T
    k = A.shape[0]
    R = np.linalg.qr(np.ascontiguousarray(A.T))[1]
    L = np.zeros((k, k))
    rk = min(R.shape[0], k)
    for i in range(rk):
        for j in range(k):
            L[j, i] = R[i, j]
    return L


@njit(cache=True)
def sqrt_filter(y, mask, Zs, T, SRQ, SH, a1, S1, can_freeze, freeze_tol,
                a_out, P_out, att_out, Ptt_out, v_out, F_out, K_out, Finv_out):
    n, p = y.shape
    m = T.shape[0]
    tv = Zs.shape[0] > 1
    a = a1.copy()
    S = S1.copy()
    P = S @ S.T
    ll = 0.0
    n_obs = 0
    frozen = False
    K_last = np.zeros((m, p))
    Finv_last = np.zeros((p, p))
    SFi_last = np.zeros((p, p))
    logdet_last = 0.0
    for t in range(n):
        a_out[t] = a
        P_out[t] = P
        Zt = Zs[t] if tv else Zs[0]
        idx = _observed(mask[t])
        po = idx.shape[0]
        full = po == p
        if not full:
            frozen = False

        if frozen:
            v = y[t] - Zt @ a
            att = a + K_last @ v
            w = SFi_last @ v
            att_out[t] = att
            Ptt_out[t] = Ptt_out[t - 1]
            F_out[t] = F_out[t - 1]
            v_out[t] = v
            K_out[t] = K_last
            Finv_out[t] = Finv_last
            ll -= 0.5 * (p * LOG_2PI + logdet_last + w @ w)
            n_obs += p
            a = T @ att
            continue

        ZS = Zt @ S
        MF = np.hstack((ZS, SH))
        F_out[t] = MF @ MF.T
        if po > 0:
            pre = np.zeros((po + m, m + p))
            pre[:po, :m] = ZS[idx]
            pre[:po, m:] = SH[idx]
            pre[po:, :m] = S
            L = _lower_from_rows(pre)
            SF = L[:po, :po].copy()
            G = L[po:, :po].copy()
            Sf = L[po:, po:].copy()
            dmax = 0.0
            dmin = np.inf
            for j in range(po):
                d = abs(SF[j, j])
                dmax = max(dmax, d)
                dmin = min(dmin, d)
            if not np.isfinite(L).all() or dmin <= 1e-150 * max(1.0, dmax):
                return ll, n_obs, t + 1
            SFi = _lower_inverse(SF)
            v = y[t][idx] - Zt[idx] @ a
            w = SFi @ v
            Finv = SFi.T @ SFi
            K = G @ SFi
            logdet = 0.0
            for j in range(po):
                logdet += 2.0 * math.log(abs(SF[j, j]))
            ll -= 0.5 * (po * LOG_2PI + logdet + w @ w)
            n_obs += po
            att = a + G @ w
            for j in range(po):
                v_out[t, idx[j]] = v[j]
                K_out[t, :, idx[j]] = K[:, j]
                for q in range(po):
                    Finv_out[t, idx[j], idx[q]] = Finv[j, q]
            if full:
                K_last = K
                Finv_last = Finv
                SFi_last = SFi
                logdet_last = logdet
        else:
            att = a
            Sf = S
        att_out[t] = att
        Ptt_out[t] = Sf @ Sf.T
        a = T @ att
        S_next = _lower_from_rows(np.hstack((T @ Sf, SRQ)))
        P_next = S_next @ S_next.T
        if can_freeze and full:
            frozen = np.abs(P_next - P).max() < freeze_tol * (1.0 + np.abs(P).max())
            if frozen:
                S_next = S
                P_next = P
        S = S_next
        P = P_next
    a_out[n] = a
    P_out[n] = P
    return ll, n_obs, -1
