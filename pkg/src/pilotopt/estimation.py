"""Training signals, MMSE channel estimation, and estimation-error metrics.

Pilot entries carry sqrt(mW) so squared magnitudes are mW and products
against the noise variance (mW) are dimensionally consistent. Channel
entries are unit-variance complex Gaussians, CN(0,1) = N(0, 1/2) + 1j*N(0, 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .network import NetworkRealization

# draws per batch in Monte-Carlo loops; fixed so the reduction order (and
# therefore the result) is independent of memory pressure
MC_CHUNK = 256


@dataclass
class PilotSet:
    """Pilot matrices of all cells: pilots[c] is tau x N, entries in sqrt-mW."""

    pilots: np.ndarray   # (C, tau, N) complex

    def __post_init__(self):
        self.pilots = np.asarray(self.pilots, dtype=complex)
        if self.pilots.ndim != 3:
            raise ValueError("pilots must have shape (C, tau, N)")

    @property
    def num_cells(self) -> int:
        return self.pilots.shape[0]

    @property
    def tau(self) -> int:
        return self.pilots.shape[1]

    @property
    def num_users(self) -> int:
        return self.pilots.shape[2]

    def __getitem__(self, c: int) -> np.ndarray:
        return self.pilots[c]

    def gram_max_eig(self, c: int) -> float:
        """Largest eigenvalue of X_c^H X_c (per-cell transmit power check)."""
        X = self.pilots[c]
        return float(np.linalg.eigvalsh(X.conj().T @ X)[-1])

    def is_feasible(self, p_max_mw: float, tol: float = 1e-6) -> bool:
        """Whether every cell satisfies the matrix power constraint."""
        return all(self.gram_max_eig(c) <= p_max_mw * (1.0 + tol)
                   for c in range(self.num_cells))

    def copy(self) -> "PilotSet":
        return PilotSet(self.pilots.copy())


@dataclass
class ChannelRealization:
    """One joint draw of small-scale fading and receiver noise.

    small_scale[c, cs] is the N x M matrix from users of cell c to the
    antennas of BS cs; noise[cs] is the tau x M training-noise matrix.
    """

    small_scale: np.ndarray   # (C, C, N, M) complex
    noise: np.ndarray         # (C, tau, M) complex


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0):
    """CN(0, variance) array: independent real/imag parts of variance/2."""
    scale = np.sqrt(variance / 2.0)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * scale


def draw_channel(num_cells: int, num_users: int, num_antennas: int, tau: int,
                 sigma2_mw: float, seed) -> ChannelRealization:
    """Draw an i.i.d. ChannelRealization; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    H = complex_gaussian(rng, (num_cells, num_cells, num_users, num_antennas))
    V = complex_gaussian(rng, (num_cells, tau, num_antennas), sigma2_mw)
    return ChannelRealization(small_scale=H, noise=V)


@dataclass
class EstimateBundle:
    """MMSE estimate, its error against the true channel, and the analytic MSE."""

    estimate: np.ndarray     # (N, M) complex
    error: np.ndarray        # (N, M) complex
    analytic_mse: float


def _chol_solve(hpd: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve hpd @ x = rhs via Cholesky; failure propagates as LinAlgError.

    The matrices here are Hermitian positive definite whenever the noise
    variance is positive, so a factorization failure indicates a bug and
    must surface rather than being regularized away.
    """
    c, low = sla.cho_factor(hpd, lower=True, check_finite=False)
    return sla.cho_solve((c, low), rhs, check_finite=False)


def received_training(pilots: PilotSet, net: NetworkRealization,
                      ch: ChannelRealization, cstar: int) -> np.ndarray:
    """Received training block at BS cstar: sum of faded pilots plus noise."""
    C = pilots.num_cells
    if net.large_scale.shape[0] != C or ch.small_scale.shape[0] != C:
        raise ValueError("pilots, network, and channel disagree on num_cells")
    Y = ch.noise[cstar].copy()
    for c in range(C):
        Y += (pilots[c] * np.sqrt(net.large_scale[c, cstar])) @ ch.small_scale[c, cstar]
    return Y


def interference_matrix_F(pilots: PilotSet, net: NetworkRealization,
                          cstar: int, sigma2_mw: float) -> np.ndarray:
    """Covariance of interference-plus-noise seen by cell cstar's pilots.

    Sum of X_c D_{c,cstar} X_c^H over all other cells plus sigma2 * I;
    Hermitian positive definite for sigma2 > 0.
    """
    tau = pilots.tau
    F = sigma2_mw * np.eye(tau, dtype=complex)
    for c in range(pilots.num_cells):
        if c == cstar:
            continue
        Xs = pilots[c] * np.sqrt(net.large_scale[c, cstar])
        F += Xs @ Xs.conj().T
    return F


def mmse_filter(pilots: PilotSet, net: NetworkRealization, cstar: int,
                sigma2_mw: float) -> np.ndarray:
    """N x tau filter mapping the received block to the channel estimate.

    The cross- and auto-covariance of the estimator share a common factor
    equal to the antenna count, which cancels; the filter is therefore
    independent of the number of antennas.
    """
    tau = pilots.tau
    omega = sigma2_mw * np.eye(tau, dtype=complex)
    for c in range(pilots.num_cells):
        Xs = pilots[c] * np.sqrt(net.large_scale[c, cstar])
        omega += Xs @ Xs.conj().T
    Xs_own = pilots[cstar] * np.sqrt(net.large_scale[cstar, cstar])
    # W = D^{1/2} X^H Omega^{-1}, computed as (Omega^{-1} X D^{1/2})^H
    return _chol_solve(omega, Xs_own).conj().T


def mmse_estimate(Y: np.ndarray, pilots: PilotSet, net: NetworkRealization,
                  cstar: int, sigma2_mw: float) -> np.ndarray:
    """MMSE estimate of the own-cell small-scale channel from Y."""
    if Y.shape[0] != pilots.tau:
        raise ValueError(f"Y has {Y.shape[0]} rows, expected tau={pilots.tau}")
    return mmse_filter(pilots, net, cstar, sigma2_mw) @ Y


def estimate_bundle(pilots: PilotSet, net: NetworkRealization,
                    ch: ChannelRealization, cstar: int, sigma2_mw: float,
                    num_antennas: int) -> EstimateBundle:
    """Estimate the own-cell channel for one draw and report the error."""
    Y = received_training(pilots, net, ch, cstar)
    est = mmse_estimate(Y, pilots, net, cstar, sigma2_mw)
    err = ch.small_scale[cstar, cstar] - est
    mse = mse_woodbury(pilots, net, cstar, num_antennas, sigma2_mw)
    return EstimateBundle(estimate=est, error=err, analytic_mse=mse)


def mse_direct(pilots: PilotSet, net: NetworkRealization, cstar: int,
               num_antennas: int, sigma2_mw: float) -> float:
    """Estimation MSE via the matrix-inversion-lemma expansion.

    Evaluates M * Tr(Ainv - Ainv B (Cinv + D Ainv B)^{-1} D Ainv) with
    Ainv = I_N, B = M D^{1/2} X^H, D = X D^{1/2}, Cinv = M F; the kept
    M factors cancel only algebraically, which is what the cross-form
    equivalence tests exercise.
    """
    M = num_antennas
    N = pilots.num_users
    dh = np.sqrt(net.large_scale[cstar, cstar])
    X = pilots[cstar]
    B = M * (X * dh).conj().T                     # N x tau scaled
    Dm = X * dh                                   # tau x N
    Cinv = M * interference_matrix_F(pilots, net, cstar, sigma2_mw)
    middle = _chol_solve(Cinv + Dm @ B, Dm)       # (Cinv + D B)^{-1} D
    val = M * np.trace(np.eye(N) - B @ middle).real
    return float(val)


def mse_woodbury(pilots: PilotSet, net: NetworkRealization, cstar: int,
                 num_antennas: int, sigma2_mw: float) -> float:
    """Estimation MSE as M * Tr((I + D^{1/2} X^H F^{-1} X D^{1/2})^{-1})."""
    N = pilots.num_users
    dh = np.sqrt(net.large_scale[cstar, cstar])
    Xs = pilots[cstar] * dh
    F = interference_matrix_F(pilots, net, cstar, sigma2_mw)
    Q = Xs.conj().T @ _chol_solve(F, Xs)
    inv = np.linalg.inv(np.eye(N) + Q)
    return float(num_antennas * np.trace(inv).real)


def empirical_mse(pilots: PilotSet, net: NetworkRealization, cstar: int,
                  num_antennas: int, sigma2_mw: float, n_draws: int,
                  seed) -> tuple[float, float]:
    """Monte-Carlo estimate of E||H - Hhat||_F^2 with its standard error.

    Averages over n_draws (>= 100) independent channel/noise draws in
    fixed-size batches so the reduction order is deterministic.
    """
    if n_draws < 100:
        raise ValueError("n_draws must be >= 100")
    C, tau, N = pilots.pilots.shape
    M = num_antennas
    W = mmse_filter(pilots, net, cstar, sigma2_mw)
    # scaled pilots per interfering cell, folded through the filter:
    # Hhat = sum_c (W X_c D^{1/2}) H_c + W V
    mix = np.stack([W @ (pilots[c] * np.sqrt(net.large_scale[c, cstar]))
                    for c in range(C)])           # (C, N, N)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_draws:
        b = min(MC_CHUNK, n_draws - done)
        H = complex_gaussian(rng, (b, C, N, M))
        V = complex_gaussian(rng, (b, tau, M), sigma2_mw)
        est = np.einsum("cij,bcjm->bim", mix, H, optimize=True) + W @ V
        errs = H[:, cstar] - est
        vals = np.sum(np.abs(errs) ** 2, axis=(1, 2))
        total += vals.sum()
        total_sq += (vals ** 2).sum()
        done += b
    mean = total / n_draws
    var = max(total_sq / n_draws - mean ** 2, 0.0) * n_draws / (n_draws - 1)
    return float(mean), float(np.sqrt(var / n_draws))
