"""Per-cell pilot update as a real-embedded semidefinite program.

The update for one cell is a trace-minimization over three complex
variable groups: the pilot matrix X (tau x N), a Hermitian epigraph
variable G (N x N), and a Hermitian coupling variable A (N x N). Two
Hermitian LMI blocks constrain them:

    power block       [[Pmax I_N, X^H], [X, I_tau]]  >= 0
    estimation block  [[G, I_N], [I_N, I_N + A]]     >= 0

and an affine equality ties A to the symmetrized interference coupling

    2 A = D^{1/2} X^H F^{-1} Xprev D^{1/2} + D^{1/2} Xprev^H F^{-1} X D^{1/2},

where F is the interference-plus-noise covariance built from the other
cells' previous pilots and Xprev is this cell's previous pilot matrix.
The right-hand side is Hermitian for every X because its two terms are
conjugate transposes of each other.

Everything is solved over real decision variables: complex Hermitian
blocks map to real symmetric ones via the standard embedding
H -> [[Re H, -Im H], [Im H, Re H]]. The interior-point solve is cvxopt's
conelp; a structured KKT solver exploits the fact that every LMI
coefficient matrix has at most four nonzero entries, which collapses the
Schur-complement assembly to a handful of small dense products.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from cvxopt import matrix as cvxmatrix
from cvxopt import solvers as cvxsolvers
from cvxopt import spmatrix as cvxspmatrix

from .errors import SolverError
from .estimation import PilotSet, interference_matrix_F
from .network import NetworkRealization

# defaults: relative duality gap two+ orders below the outer loop's stopping
# threshold; feasibility tolerance applied to the scaled (unit-power) blocks
DEFAULT_EPS_SOLVER = 1e-8
FEASIBILITY_TOL = 1e-8


def hermitian_to_real(H: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Embed a complex Hermitian matrix as a real symmetric one.

    Maps H to [[Re H, -Im H], [Im H, Re H]]; the embedding is PSD exactly
    when H is, and carries H's eigenvalues with doubled multiplicity.
    Raises ValueError when H is not Hermitian to within tol (Frobenius).
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(H - H.conj().T) > tol * scale:
        raise ValueError("matrix is not Hermitian to within tolerance")
    R, S = H.real, H.imag
    return np.block([[R, -S], [S, R]])


def herm_param_indices(n: int):
    """Index pairs of the real parameterization of an n x n Hermitian matrix.

    Real parts of the upper triangle (diagonal included, column-major)
    come first, then imaginary parts of the strict upper triangle:
    n*(n+1)/2 + n*(n-1)/2 = n^2 reals in total.
    """
    re_ij = [(i, j) for j in range(n) for i in range(j + 1)]
    im_ij = [(i, j) for j in range(n) for i in range(j)]
    return re_ij, im_ij


def herm_from_params(v: np.ndarray, n: int) -> np.ndarray:
    re_ij, im_ij = herm_param_indices(n)
    H = np.zeros((n, n), dtype=complex)
    k = 0
    for (i, j) in re_ij:
        H[i, j] += v[k]
        if i != j:
            H[j, i] += v[k]
        k += 1
    for (i, j) in im_ij:
        H[i, j] += 1j * v[k]
        H[j, i] += -1j * v[k]
        k += 1
    return H


def herm_to_params(H: np.ndarray) -> np.ndarray:
    n = H.shape[0]
    re_ij, im_ij = herm_param_indices(n)
    out = np.empty(n * n)
    k = 0
    for (i, j) in re_ij:
        out[k] = H[i, j].real
        k += 1
    for (i, j) in im_ij:
        out[k] = H[i, j].imag
        k += 1
    return out


class AffineHermitianBlock:
    """Affine Hermitian-matrix expression: const + sum_k v_k * coeff_k.

    Coefficients are stored sparsely as complex entry triplets (a, b, w)
    per variable, covering both (a, b) and its conjugate mirror, so the
    expression is Hermitian for every real assignment by construction.
    """

    def __init__(self, dim: int, const: np.ndarray, var_entries: dict):
        self.dim = dim
        self.const = np.asarray(const, dtype=complex)
        self.var_entries = var_entries
        self.var_index = np.array(sorted(var_entries), dtype=np.intp)
        # padded real-embedding patterns, one row per variable
        d = 2 * dim
        ents = {k: self._real_entries(v) for k, v in var_entries.items()}
        width = max(len(e) for e in ents.values())
        K = len(self.var_index)
        self.rows = np.zeros((K, width), dtype=np.intp)
        self.cols = np.zeros((K, width), dtype=np.intp)
        self.vals = np.zeros((K, width))
        for kk, k in enumerate(self.var_index):
            for p, (a, b, w) in enumerate(ents[k]):
                self.rows[kk, p], self.cols[kk, p], self.vals[kk, p] = a, b, w
        self.dim_real = d

    def _real_entries(self, entries):
        out = []
        n = self.dim
        for (a, b, w) in entries:
            if w.real != 0.0:
                out += [(a, b, w.real), (n + a, n + b, w.real)]
            if w.imag != 0.0:
                out += [(a, n + b, -w.imag), (n + a, b, w.imag)]
        return out

    def evaluate(self, v: np.ndarray) -> np.ndarray:
        """Complex Hermitian value of the block at real variable vector v."""
        H = self.const.copy()
        for k, entries in self.var_entries.items():
            vk = v[k]
            if vk == 0.0:
                continue
            for (a, b, w) in entries:
                H[a, b] += vk * w
        return H

    def const_real(self) -> np.ndarray:
        return hermitian_to_real(self.const)

    def evaluate_real(self, v: np.ndarray) -> np.ndarray:
        """Real-symmetric embedding of the block value at v."""
        M = self.const_real().copy()
        np.add.at(M, (self.rows.ravel(), self.cols.ravel()),
                  (self.vals * v[self.var_index][:, None]).ravel())
        return M

    # ---- solver support on the real embedding ----
    def schur_block(self, U: np.ndarray) -> np.ndarray:
        """Gram matrix of the scaled coefficient columns, tr(Vk' Vl).

        U is the inverse scaling factor; Vk = U Mk U' where Mk is the
        real-embedded coefficient of variable k. Building the Vk from
        U's columns keeps the result a numerical Gram matrix (PSD).
        """
        K, P = self.vals.shape
        d = U.shape[0]
        V = np.zeros((K, d, d))
        for p in range(P):
            left = (U[:, self.rows[:, p]] * self.vals[:, p]).T   # (K, d)
            V += left[:, :, None] * U[:, self.cols[:, p]].T[:, None, :]
        Vm = V.reshape(K, -1)
        H = sla.blas.dsyrk(1.0, Vm, lower=0)
        return H + np.triu(H, 1).T

    def gather(self, M: np.ndarray) -> np.ndarray:
        """Adjoint of the coefficient map applied to a real matrix."""
        return (M[self.rows, self.cols] * self.vals).sum(axis=1)

    def scatter(self, u: np.ndarray) -> np.ndarray:
        """sum_k u_k Mk over this block's variables (real embedding)."""
        M = np.zeros((self.dim_real, self.dim_real))
        np.add.at(M, (self.rows.ravel(), self.cols.ravel()),
                  (self.vals * u[:, None]).ravel())
        return M


@dataclass
class ConicProgram:
    """One cell's pilot-update SDP over real decision variables.

    Variable vector layout: [Re X (tau*N), Im X (tau*N), herm(G) (N^2),
    herm(A) (N^2)], with X stored column-major (index t + tau*n) and
    Hermitian parameters ordered per herm_param_indices. All data is in
    physical units (pilot entries sqrt-mW); solve() equilibrates
    internally.
    """

    tau: int
    num_users: int
    p_max_mw: float
    sigma2_mw: float
    objective: np.ndarray               # (nvar,)
    lmi_blocks: list                    # [power block, estimation block]
    eq_matrix: np.ndarray               # (N^2, nvar)
    eq_rhs: np.ndarray                  # (N^2,)
    prev_pilot: np.ndarray              # Xprev (tau, N)
    interference: np.ndarray            # F (tau, tau)
    gain_sqrt: np.ndarray               # D^{1/2} diagonal (N,)
    cell: int = 0

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_pilot_vars(self) -> int:
        return 2 * self.tau * self.num_users

    def pack(self, X: np.ndarray, G: np.ndarray, A: np.ndarray) -> np.ndarray:
        tauN = self.tau * self.num_users
        v = np.empty(self.n_vars)
        v[:tauN] = np.asarray(X).real.reshape(-1, order="F")
        v[tauN:2 * tauN] = np.asarray(X).imag.reshape(-1, order="F")
        v[2 * tauN:2 * tauN + self.num_users ** 2] = herm_to_params(np.asarray(G, complex))
        v[2 * tauN + self.num_users ** 2:] = herm_to_params(np.asarray(A, complex))
        return v

    def unpack(self, v: np.ndarray):
        tau, N = self.tau, self.num_users
        tauN = tau * N
        X = (v[:tauN] + 1j * v[tauN:2 * tauN]).reshape((tau, N), order="F")
        G = herm_from_params(v[2 * tauN:2 * tauN + N * N], N)
        A = herm_from_params(v[2 * tauN + N * N:], N)
        return X, G, A

    def coupling(self, X: np.ndarray) -> np.ndarray:
        """D^{1/2} X^H F^{-1} Xprev D^{1/2} for a candidate pilot matrix."""
        rhs = _chol_solve_h(self.interference, self.prev_pilot * self.gain_sqrt)
        return (X * self.gain_sqrt).conj().T @ rhs

    def symmetrized_coupling(self, X: np.ndarray) -> np.ndarray:
        """The Hermitian A determined by the equality constraint at X."""
        S = self.coupling(X)
        return (S + S.conj().T) / 2.0

    def feasibility_report(self, v: np.ndarray) -> dict:
        """Minimum block eigenvalues and equality residual at v."""
        eigs = [float(np.linalg.eigvalsh(blk.evaluate(v))[0])
                for blk in self.lmi_blocks]
        resid = float(np.abs(self.eq_matrix @ v - self.eq_rhs).max())
        return {"min_eigs": eigs, "eq_residual": resid}


@dataclass
class SolverReport:
    """Outcome of one interior-point solve."""

    status: str                 # optimal | infeasible | numerical-failure | iteration-limit
    objective: float
    pilots: np.ndarray          # recovered complex X (tau, N)
    epigraph: np.ndarray        # G (N, N)
    coupling: np.ndarray        # A (N, N)
    max_violation: float        # worst PSD violation of the scaled blocks
    eq_residual: float
    gap: float
    relative_gap: float
    iterations: int
    solution: np.ndarray = field(repr=False, default=None)


def _chol_solve_h(hpd: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    c, low = sla.cho_factor(hpd, lower=True, check_finite=False)
    return sla.cho_solve((c, low), rhs, check_finite=False)


# --------------------------------------------------------------- construction

def _var_layout(tau: int, N: int):
    tauN = tau * N
    ix_re = lambda t, n: t + tau * n
    ix_im = lambda t, n: tauN + t + tau * n
    g0 = 2 * tauN
    a0 = g0 + N * N
    return ix_re, ix_im, g0, a0


@functools.lru_cache(maxsize=None)
def _static_patterns(tau: int, N: int):
    """Shape-dependent block patterns for the unit-power scaled program."""
    ix_re, ix_im, g0, a0 = _var_layout(tau, N)
    re_ij, im_ij = herm_param_indices(N)
    nvar = a0 + N * N

    n1 = N + tau
    ent1 = {}
    for n in range(N):
        for t in range(tau):
            ent1[ix_re(t, n)] = [(n, N + t, 1 + 0j), (N + t, n, 1 + 0j)]
            ent1[ix_im(t, n)] = [(n, N + t, -1j), (N + t, n, 1j)]
    block1 = AffineHermitianBlock(n1, np.eye(n1, dtype=complex), ent1)

    n2 = 2 * N
    ent2 = {}
    for k, (i, j) in enumerate(re_ij):
        ent2[g0 + k] = ([(i, i, 1 + 0j)] if i == j
                        else [(i, j, 1 + 0j), (j, i, 1 + 0j)])
        ent2[a0 + k] = ([(N + i, N + i, 1 + 0j)] if i == j
                        else [(N + i, N + j, 1 + 0j), (N + j, N + i, 1 + 0j)])
    off = len(re_ij)
    for k, (i, j) in enumerate(im_ij):
        ent2[g0 + off + k] = [(i, j, 1j), (j, i, -1j)]
        ent2[a0 + off + k] = [(N + i, N + j, 1j), (N + j, N + i, -1j)]
    const2 = np.zeros((n2, n2), dtype=complex)
    const2[:N, N:] = np.eye(N)
    const2[N:, :N] = np.eye(N)
    const2[N:, N:] = np.eye(N)
    block2 = AffineHermitianBlock(n2, const2, ent2)

    cobj = np.zeros(nvar)
    for k, (i, j) in enumerate(re_ij):
        if i == j:
            cobj[g0 + k] = 1.0

    # cone data for conelp: G columns are the negated real-embedded
    # coefficients, h the real-embedded constants
    I, J, V = [], [], []
    roff = 0
    for blk in (block1, block2):
        d = blk.dim_real
        for kk, k in enumerate(blk.var_index):
            for p in range(blk.vals.shape[1]):
                s = blk.vals[kk, p]
                if s != 0.0:
                    I.append(roff + int(blk.rows[kk, p]) + d * int(blk.cols[kk, p]))
                    J.append(int(k))
                    V.append(float(-s))
        roff += d * d
    Gcone = cvxspmatrix(V, I, J, (roff, nvar))
    hcone = cvxmatrix(np.concatenate([blk.const_real().reshape(-1, order="F")
                                      for blk in (block1, block2)]))
    dims = {"l": 0, "q": [], "s": [block1.dim_real, block2.dim_real]}
    return block1, block2, cobj, Gcone, hcone, dims


def _equality_rows(T: np.ndarray, dh: np.ndarray, tau: int, N: int) -> np.ndarray:
    """Rows of 2A - (Dh X^H T + T^H X Dh) = 0 over the real variables.

    T folds F^{-1} Xprev Dh (tau x N); one row per Hermitian parameter
    of A: real parts for i <= j, imaginary parts for i < j.
    """
    ix_re, ix_im, g0, a0 = _var_layout(tau, N)
    re_ij, im_ij = herm_param_indices(N)
    nvar = a0 + N * N
    rows = np.zeros((N * N, nvar))
    r = 0
    for k, (i, j) in enumerate(re_ij):
        row = rows[r]
        ts = slice(0, tau)
        row[i * tau:(i + 1) * tau] += -dh[i] * T[:, j].real
        row[tau * N + i * tau:tau * N + (i + 1) * tau] += -dh[i] * T[:, j].imag
        row[j * tau:(j + 1) * tau] += -dh[j] * T[:, i].real
        row[tau * N + j * tau:tau * N + (j + 1) * tau] += -dh[j] * T[:, i].imag
        row[a0 + k] += 2.0
        r += 1
    off = len(re_ij)
    for k, (i, j) in enumerate(im_ij):
        row = rows[r]
        row[i * tau:(i + 1) * tau] += -dh[i] * T[:, j].imag
        row[tau * N + i * tau:tau * N + (i + 1) * tau] += +dh[i] * T[:, j].real
        row[j * tau:(j + 1) * tau] += +dh[j] * T[:, i].imag
        row[tau * N + j * tau:tau * N + (j + 1) * tau] += -dh[j] * T[:, i].real
        row[a0 + off + k] += 2.0
        r += 1
    return rows


def build_subproblem(cstar: int, previous_pilots: PilotSet,
                     net: NetworkRealization, p_max_mw: float,
                     sigma2_mw: float) -> ConicProgram:
    """Assemble the cell's pilot-update SDP around the previous pilots."""
    if sigma2_mw <= 0:
        raise ValueError("sigma2_mw must be > 0")
    tau, N = previous_pilots.tau, previous_pilots.num_users
    block1_s, block2, cobj, _, _, _ = _static_patterns(tau, N)

    # physical power block carries Pmax in the upper-left corner
    const1 = np.eye(N + tau, dtype=complex)
    const1[:N, :N] *= p_max_mw
    block1 = AffineHermitianBlock(N + tau, const1, block1_s.var_entries)

    F = interference_matrix_F(previous_pilots, net, cstar, sigma2_mw)
    dh = np.sqrt(net.large_scale[cstar, cstar])
    Xprev = previous_pilots[cstar]
    T = _chol_solve_h(F, Xprev * dh)          # F^{-1} Xprev Dh
    eq = _equality_rows(T, dh, tau, N)
    return ConicProgram(
        tau=tau, num_users=N, p_max_mw=p_max_mw, sigma2_mw=sigma2_mw,
        objective=cobj.copy(), lmi_blocks=[block1, block2],
        eq_matrix=eq, eq_rhs=np.zeros(N * N), prev_pilot=Xprev.copy(),
        interference=F, gain_sqrt=dh, cell=cstar,
    )


# -------------------------------------------------------------------- solving

def _make_kktsolver(block1, block2, Aeq):
    """Structured KKT solver for conelp.

    Eliminates the cone block through H = G'(W'W)^{-1}G, assembled per
    LMI block as a numerical Gram matrix of the scaled coefficient
    columns, then solves the remaining saddle system with the equality
    rows by a Cholesky-of-Schur-complement factorization.
    """
    d1, d2 = block1.dim_real, block2.dim_real
    nvar = Aeq.shape[1]
    AeqT = np.ascontiguousarray(Aeq.T)
    i1, i2 = block1.var_index, block2.var_index

    def kktsolver(W):
        U1 = np.array(W["rti"][0]).T          # r^{-1}
        U2 = np.array(W["rti"][1]).T
        Gam1 = U1.T @ U1
        Gam2 = U2.T @ U2
        H = np.zeros((nvar, nvar))
        H[np.ix_(i1, i1)] = block1.schur_block(U1)
        H[np.ix_(i2, i2)] += block2.schur_block(U2)
        try:
            cH = sla.cho_factor(H, lower=True, check_finite=False)
            solveH = lambda r: sla.cho_solve(cH, r, check_finite=False)
        except np.linalg.LinAlgError:
            luH = sla.lu_factor(H, check_finite=False)
            solveH = lambda r: sla.lu_solve(luH, r, check_finite=False)
        S = Aeq @ solveH(AeqT)
        try:
            cS = sla.cho_factor(S, lower=True, check_finite=False)
            solveS = lambda r: sla.cho_solve(cS, r, check_finite=False)
        except np.linalg.LinAlgError:
            luS = sla.lu_factor(S, check_finite=False)
            solveS = lambda r: sla.lu_solve(luS, r, check_finite=False)

        def f(x, y, z):
            bx = np.array(x).ravel()
            by = np.array(y).ravel()
            bz = np.array(z).ravel()
            Z1 = bz[:d1 * d1].reshape(d1, d1, order="F")
            Z2 = bz[d1 * d1:].reshape(d2, d2, order="F")
            Z1 = np.tril(Z1) + np.tril(Z1, -1).T    # lower storage only
            Z2 = np.tril(Z2) + np.tril(Z2, -1).T
            P1 = Gam1 @ Z1 @ Gam1
            P2 = Gam2 @ Z2 @ Gam2
            # cone matrix columns are -coeff, so its adjoint negates gather
            rx = bx.copy()
            rx[i1] -= block1.gather(P1)
            rx[i2] -= block2.gather(P2)
            w1 = solveH(rx)
            uy = solveS(Aeq @ w1 - by)
            ux = solveH(rx - AeqT @ uy)
            M1 = -block1.scatter(ux[i1]) - Z1       # G ux - bz per block
            M2 = -block2.scatter(ux[i2]) - Z2
            Zo1 = U1 @ M1 @ U1.T
            Zo2 = U2 @ M2 @ U2.T
            x[:] = cvxmatrix(ux)
            y[:] = cvxmatrix(uy)
            z[:] = cvxmatrix(np.concatenate([Zo1.reshape(-1, order="F"),
                                             Zo2.reshape(-1, order="F")]))

        return f

    return kktsolver


def _conelp_attempt(cobj, Gcone, hcone, dims, Aeq_s, eps_solver, refinement,
                    structured, block1, block2):
    opts = {
        "show_progress": False,
        "abstol": eps_solver,
        "reltol": eps_solver,
        "feastol": FEASIBILITY_TOL,
        "maxiters": 100,
        "refinement": refinement,
    }
    kw = {}
    if structured:
        kw["kktsolver"] = _make_kktsolver(block1, block2, Aeq_s)
    try:
        return cvxsolvers.conelp(
            cvxmatrix(cobj), Gcone, hcone, dims,
            A=cvxmatrix(Aeq_s), b=cvxmatrix(np.zeros(Aeq_s.shape[0])),
            options=opts, **kw)
    except (ZeroDivisionError, ArithmeticError, np.linalg.LinAlgError):
        return None


def solve(program: ConicProgram, eps_solver: float = DEFAULT_EPS_SOLVER) -> SolverReport:
    """Interior-point solve of the cell subproblem to a relative gap <= eps.

    The program is equilibrated first: pilot variables are expressed in
    units of sqrt(Pmax), which turns the power block into a unit-diagonal
    LMI, and equality rows are scaled to unit maximum coefficient. A
    structured-KKT solve is attempted first and falls back to higher
    refinement and then to cvxopt's reference KKT factorization before
    reporting failure. X = 0, G = I, A = 0 is strictly interior scalable,
    so an 'infeasible' status is treated as a numerical failure.
    """
    tau, N = program.tau, program.num_users
    block1, block2, cobj, Gcone, hcone, dims = _static_patterns(tau, N)
    sqrtP = np.sqrt(program.p_max_mw)

    # column scaling: x variables in sqrt(Pmax) units
    nx = program.n_pilot_vars
    Aeq_s = program.eq_matrix.copy()
    Aeq_s[:, :nx] *= sqrtP
    row_scale = np.abs(Aeq_s).max(axis=1)
    row_scale[row_scale == 0] = 1.0
    Aeq_s /= row_scale[:, None]

    sol = None
    for refinement, structured in ((5, True), (9, True), (1, False)):
        sol = _conelp_attempt(cobj, Gcone, hcone, dims, Aeq_s, eps_solver,
                              refinement, structured, block1, block2)
        if sol is not None and sol["status"] == "optimal":
            break

    if sol is None:
        raise SolverError(f"cell {program.cell}: interior-point solve broke down")

    status = sol["status"]
    if status in ("primal infeasible", "dual infeasible"):
        # cannot happen for a well-formed program; surface as failure
        raise SolverError(f"cell {program.cell}: solver reported {status}")

    v = np.array(sol["x"]).ravel() if sol["x"] is not None else None
    if v is None:
        raise SolverError(f"cell {program.cell}: solver returned no iterate")
    v_phys = v.copy()
    v_phys[:nx] *= sqrtP
    X, G, A = ConicProgram.unpack(program, v_phys)

    # violations on the scaled blocks (where the feasibility tolerance lives)
    scaled1 = block1.evaluate(v)
    scaled2 = block2.evaluate(v)
    min1 = float(np.linalg.eigvalsh(scaled1)[0])
    min2 = float(np.linalg.eigvalsh(scaled2)[0])
    violation = max(0.0, -min(min1, min2))
    eq_res = float(np.abs(Aeq_s @ v).max())

    gap = float(sol["gap"])
    rel = sol["relative gap"]
    rel = float(rel) if rel is not None else gap / max(1.0, abs(sol["primal objective"]))

    if status != "optimal":
        label = "iteration-limit" if sol["iterations"] >= 100 else "numerical-failure"
        return SolverReport(status=label, objective=float(sol["primal objective"]),
                            pilots=X, epigraph=G, coupling=A,
                            max_violation=violation, eq_residual=eq_res,
                            gap=gap, relative_gap=rel,
                            iterations=int(sol["iterations"]), solution=v_phys)

    return SolverReport(status="optimal", objective=float(sol["primal objective"]),
                        pilots=X, epigraph=G, coupling=A,
                        max_violation=violation, eq_residual=eq_res,
                        gap=gap, relative_gap=rel,
                        iterations=int(sol["iterations"]), solution=v_phys)


def complexity_estimate(N: int, tau: int, eps: float) -> float:
    """Worst-case interior-point arithmetic cost of one cell update.

    ln(1/eps) * sqrt(4N + tau) iteration count times the per-iteration
    cost alpha * m, with m = (2N + tau) N decision variables and
    alpha = 10 N^3 + (3 tau + 6 m) N^2 + N m tau (m tau + 2)
            + tau^2 (m + tau) + m^2.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    m = (2 * N + tau) * N
    alpha = (10 * N ** 3 + (3 * tau + 6 * m) * N ** 2
             + N * m * tau * (m * tau + 2) + tau ** 2 * (m + tau) + m ** 2)
    return float(np.log(1.0 / eps) * np.sqrt(4 * N + tau) * alpha * m)


def dump_program(program: ConicProgram, path) -> None:
    """Write a sparse text dump of the program for external cross-checks.

    Format (whitespace separated, one record per line):
        nvar <n> / tau <t> / users <N> / pmax <mW> / sigma2 <mW>
        obj <var> <coeff>
        block <idx> dim <n>
        const <block> <row> <col> <re> <im>
        coeff <block> <var> <row> <col> <re> <im>
        eq <row> <var> <coeff>
    Rows and columns index the complex-valued blocks.
    """
    lines = [f"nvar {program.n_vars}", f"tau {program.tau}",
             f"users {program.num_users}", f"pmax {program.p_max_mw!r}",
             f"sigma2 {program.sigma2_mw!r}"]
    for k in np.nonzero(program.objective)[0]:
        lines.append(f"obj {k} {program.objective[k]!r}")
    for b, blk in enumerate(program.lmi_blocks):
        lines.append(f"block {b} dim {blk.dim}")
        nz = np.argwhere(blk.const != 0)
        for i, j in nz:
            w = blk.const[i, j]
            lines.append(f"const {b} {i} {j} {w.real!r} {w.imag!r}")
        for k in blk.var_index:
            for (i, j, w) in blk.var_entries[int(k)]:
                lines.append(f"coeff {b} {k} {i} {j} {w.real!r} {w.imag!r}")
    nzr, nzc = np.nonzero(program.eq_matrix)
    for r, c in zip(nzr, nzc):
        lines.append(f"eq {r} {c} {program.eq_matrix[r, c]!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
