"""Pointwise strengthened-ellipticity forms and their estimated infima.

Three normalized forms are evaluated at a tensor ``A`` and a parameter
``t = 1 - 2/p`` in (-1, 1):

* the strong form  ``pairing(A, xi - t*xi(omega), xi + t*xi(omega))`` over
  gradient states ``xi`` and unit channel directions ``omega``;
* the direction-frozen (Legendre-Hadamard style) form built from the
  contracted matrix ``M_q = sum_hk A[h,k] q_h q_k`` over channel vectors
  ``eta``, directions ``omega`` and real unit frequencies ``q``;
* the scalar (m = 1) form ``Re <A xi, xi + |t| conj(xi)>``.

For a fixed direction the form is an exact quadratic form in the real
coordinates of the test state, so the inner infimum is the smallest
eigenvalue of an assembled symmetric matrix; only the compact direction
sphere needs a global search (seeded multistart plus local polish). The
reported value is therefore an upper bound on the true infimum and results
carry ``certified=False``.

Test-field convention: real tensors are tested with real states and real
directions, complex tensors with complex ones (``SearchConfig.test_field``
= "auto"); either choice can be forced.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionMismatchError, InputError, NumericalFailureError
from .runtime import substream
from .tensors import (
    CoefficientTensor,
    GradientState,
    UnitState,
    project_state,
    real_pairing,
)

_TEST_FIELDS = ("auto", "complex", "real")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the margin search; results depend only on ``seed``."""

    t: float = 0.0
    outer_starts: int = 64
    refine_iters: int = 400
    seed: int = 0
    eig_tol: float = 1e-10
    test_field: str = "auto"

    def __post_init__(self):
        if not -1.0 < float(self.t) < 1.0:
            raise InputError(f"t must lie in (-1, 1), got {self.t}")
        if self.outer_starts < 1:
            raise InputError("outer_starts must be >= 1")
        if self.eig_tol <= 0:
            raise InputError("eig_tol must be positive")
        if self.test_field not in _TEST_FIELDS:
            raise InputError(f"test_field must be one of {_TEST_FIELDS}")

    def resolve_field(self, A) -> str:
        if self.test_field != "auto":
            return self.test_field
        return "real" if A.is_real else "complex"


@dataclass(frozen=True)
class Witness:
    """Minimizing test objects found by a margin search."""

    xi: Optional[GradientState] = None      # strong form
    eta: Optional[np.ndarray] = None        # direction-frozen form, complex (m,)
    omega: Optional[UnitState] = None
    q: Optional[np.ndarray] = None          # real unit frequency, (n,)


@dataclass(frozen=True)
class MarginResult:
    """Estimated infimum of a normalized form plus its witness.

    ``value`` is an upper bound on the true infimum; ``certified`` stays
    False for the heuristic direction search.
    """

    value: float
    witness: Witness
    evaluations: int
    certified: bool = False


def strong_form_value(A: CoefficientTensor, t: float, xi: GradientState, omega: UnitState) -> float:
    """Value of the strong form at one test pair.

    Exactly quadratic in t for fixed (xi, omega); the t^2 coefficient is
    -pairing(A, xi(omega), xi(omega)).
    """
    if not -1.0 < t < 1.0:
        raise InputError(f"t must lie in (-1, 1), got {t}")
    xo = project_state(xi, omega)
    minus = GradientState(xi.components - t * xo.components)
    plus = GradientState(xi.components + t * xo.components)
    return real_pairing(A, minus, plus)


def lh_form_value(A: CoefficientTensor, t: float, eta, omega: UnitState, q) -> float:
    """Value of the direction-frozen form Re<M_q (eta - t z), eta + t z>,
    z = omega * Re<omega, eta>."""
    if not -1.0 < t < 1.0:
        raise InputError(f"t must lie in (-1, 1), got {t}")
    eta = np.asarray(eta, dtype=complex)
    q = np.asarray(q, dtype=float)
    if eta.shape != (A.m,):
        raise DimensionMismatchError(f"eta must have shape ({A.m},)")
    if q.shape != (A.n,):
        raise DimensionMismatchError(f"q must have shape ({A.n},)")
    if abs(np.linalg.norm(q) - 1.0) > 1e-9:
        raise InputError("q must be a unit vector")
    Mq = np.einsum("hkab,h,k->ab", A.entries, q, q)
    c = float(np.real(np.sum(omega.components * np.conj(eta))))
    z = omega.components * c
    return float(np.real(np.einsum("ab,a,b->", Mq, eta - t * z, np.conj(eta + t * z))))


# ---------------------------------------------------------------------------
# quadratic-form assembly over the real coordinates of the test state


def _pairing_matrix(entries: np.ndarray, parts: int) -> np.ndarray:
    """Matrix G with Re<A x, y> = y_rep . G . x_rep.

    Real coordinates are flattened as (part, h, a), part-major; parts is 1
    for real-state testing and 2 (real, imaginary) otherwise.
    """
    n, m = entries.shape[0], entries.shape[2]
    Ar = entries.real.transpose(1, 3, 0, 2)  # [k, b, h, a]
    T = np.zeros((parts, n, m, parts, n, m))
    T[0, :, :, 0] = Ar
    if parts == 2:
        Ai = entries.imag.transpose(1, 3, 0, 2)
        T[1, :, :, 1] = Ar
        T[1, :, :, 0] = Ai
        T[0, :, :, 1] = -Ai
    d = parts * n * m
    return T.reshape(d, d)


def _projection_matrices(W: np.ndarray, n: int, parts: int, m: int) -> np.ndarray:
    """Batched matrices of the real-linear map xi -> xi(omega).

    W has shape (B, parts*m), rows are unit direction coordinates.
    """
    B = W.shape[0]
    Wr = W.reshape(B, parts, m)
    P = np.einsum("bpa,bqc->bpaqc", Wr, Wr)
    Pi = np.zeros((B, parts, n, m, parts, n, m))
    for h in range(n):
        Pi[:, :, h, :, :, h, :] = P
    d = parts * n * m
    return Pi.reshape(B, d, d)


def _strong_matrices(G: np.ndarray, Pi: np.ndarray, t: float) -> np.ndarray:
    d = Pi.shape[-1]
    eye = np.eye(d)
    right = eye - t * Pi   # applied to the first pairing slot
    left = eye + t * Pi    # applied to the second slot
    M = np.matmul(left.transpose(0, 2, 1), np.matmul(G, right))
    return 0.5 * (M + M.transpose(0, 2, 1))


def _eigvalsh_batch(S: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailureError(f"eigenvalue solve failed: {exc}", partial=S) from exc


def _unit_rows(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    X = rng.standard_normal((count, dim))
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return X / norms


def _complex_to_coords(vec: np.ndarray, parts: int) -> np.ndarray:
    if parts == 1:
        return np.real(np.asarray(vec)).ravel()
    return np.concatenate([np.real(vec).ravel(), np.imag(vec).ravel()])


def _coords_to_complex(x: np.ndarray, parts: int, m: int) -> np.ndarray:
    if parts == 1:
        return x.astype(complex)
    return x[:m] + 1j * x[m:]


class _StrongProblem:
    """Inner-eigenvalue evaluation of the strong form for candidate directions."""

    kind = "strong"

    def __init__(self, A: CoefficientTensor, t: float, parts: int):
        self.A = A
        self.t = t
        self.parts = parts
        self.n, self.m = A.n, A.m
        self.dim = parts * A.m
        entries = A.entries.real.astype(complex) if parts == 1 else A.entries
        self.G = _pairing_matrix(entries, parts)

    def values(self, W: np.ndarray) -> np.ndarray:
        Pi = _projection_matrices(W, self.n, self.parts, self.m)
        S = _strong_matrices(self.G, Pi, self.t)
        return _eigvalsh_batch(S)[:, 0]

    def witness(self, w: np.ndarray) -> Witness:
        Pi = _projection_matrices(w[None], self.n, self.parts, self.m)
        S = _strong_matrices(self.G, Pi, self.t)[0]
        _, vecs = np.linalg.eigh(S)
        v = vecs[:, 0].reshape(self.parts, self.n, self.m)
        xi = v[0] + 1j * v[1] if self.parts == 2 else v[0].astype(complex)
        omega = UnitState(_coords_to_complex(w, self.parts, self.m))
        return Witness(xi=GradientState(xi), omega=omega)

    def quadratic(self, wit: Witness) -> tuple[float, float, float]:
        """Coefficients (a0, a1, a2) of t -> form value at a frozen witness."""
        xi = wit.xi
        eta = project_state(xi, wit.omega)
        a0 = real_pairing(self.A, xi, xi)
        a1 = real_pairing(self.A, xi, eta) - real_pairing(self.A, eta, xi)
        a2 = -real_pairing(self.A, eta, eta)
        return a0, a1, a2


class _LHProblem:
    """Inner-eigenvalue evaluation of the direction-frozen form.

    A candidate is the concatenation [omega coords | q], each block
    normalized separately; the contracted matrix M_q is rebuilt per
    candidate and reuses the strong-form assembly with a single direction
    index.
    """

    kind = "lh"

    def __init__(self, A: CoefficientTensor, t: float, parts: int):
        self.A = A
        self.t = t
        self.parts = parts
        self.n, self.m = A.n, A.m
        self.dim = parts * A.m + A.n

    def _split(self, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pm = self.parts * self.m
        Wo, Q = W[:, :pm].copy(), W[:, pm:].copy()
        for block in (Wo, Q):
            nrm = np.linalg.norm(block, axis=1, keepdims=True)
            nrm[nrm == 0] = 1.0
            block /= nrm
        return Wo, Q

    def _contracted_pairing(self, Q: np.ndarray) -> np.ndarray:
        entries = self.A.entries.real.astype(complex) if self.parts == 1 else self.A.entries
        Mq = np.einsum("hkab,Bh,Bk->Bab", entries, Q, Q)
        m = self.m
        Mr = Mq.real.transpose(0, 2, 1)  # pairing matrix blocks are [b, a]
        if self.parts == 1:
            return Mr
        Mi = Mq.imag.transpose(0, 2, 1)
        G = np.zeros((Q.shape[0], 2 * m, 2 * m))
        G[:, :m, :m] = Mr
        G[:, m:, m:] = Mr
        G[:, m:, :m] = Mi
        G[:, :m, m:] = -Mi
        return G

    def values(self, W: np.ndarray) -> np.ndarray:
        Wo, Q = self._split(W)
        G = self._contracted_pairing(Q)
        Pi = _projection_matrices(Wo, 1, self.parts, self.m)
        M = np.matmul(
            (np.eye(G.shape[-1]) + self.t * Pi).transpose(0, 2, 1),
            np.matmul(G, np.eye(G.shape[-1]) - self.t * Pi),
        )
        S = 0.5 * (M + M.transpose(0, 2, 1))
        return _eigvalsh_batch(S)[:, 0]

    def witness(self, w: np.ndarray) -> Witness:
        Wo, Q = self._split(w[None])
        G = self._contracted_pairing(Q)[0]
        Pi = _projection_matrices(Wo, 1, self.parts, self.m)
        S = _strong_matrices(G, Pi, self.t)[0]
        _, vecs = np.linalg.eigh(S)
        v = vecs[:, 0].reshape(self.parts, self.m)
        eta = v[0] + 1j * v[1] if self.parts == 2 else v[0].astype(complex)
        omega = UnitState(_coords_to_complex(Wo[0], self.parts, self.m))
        return Witness(eta=eta, omega=omega, q=Q[0])

    def quadratic(self, wit: Witness) -> tuple[float, float, float]:
        Mq = np.einsum("hkab,h,k->ab", self.A.entries, wit.q, wit.q)
        if self.parts == 1:
            Mq = Mq.real.astype(complex)
        c = float(np.real(np.sum(wit.omega.components * np.conj(wit.eta))))
        z = wit.omega.components * c

        def pair(x, y):
            return float(np.real(np.einsum("ab,a,b->", Mq, x, np.conj(y))))

        a0 = pair(wit.eta, wit.eta)
        a1 = pair(wit.eta, z) - pair(z, wit.eta)
        a2 = -pair(z, z)
        return a0, a1, a2


def _witness_direction_coords(problem, wit: Witness) -> np.ndarray:
    w = _complex_to_coords(wit.omega.components, problem.parts)
    if problem.kind == "lh":
        q = wit.q if wit.q is not None else np.ones(problem.n) / np.sqrt(problem.n)
        w = np.concatenate([w, q])
    return w


def _minimize_directions(problem, cfg: SearchConfig, extra_starts=(),
                         starts_count=None, polish=3) -> MarginResult:
    """Multistart + local polish over the compact direction set."""
    rng = substream(cfg.seed, 0xD17)
    starts = _unit_rows(rng, starts_count or cfg.outer_starts, problem.dim)
    extras = [np.asarray(w, dtype=float) for w in extra_starts]
    if extras:
        starts = np.vstack([starts] + [e[None] for e in extras])
    evals = starts.shape[0]
    vals = problem.values(starts)

    order = np.argsort(vals)
    top = order[: max(1, min(polish, len(order)))]
    best_w = starts[top[0]]
    best_v = float(vals[top[0]])

    counter = [evals]

    def objective(z):
        z = np.asarray(z, dtype=float)
        nrm = np.linalg.norm(z)
        if not np.isfinite(nrm) or nrm < 1e-12:
            return 1e300
        counter[0] += 1
        return float(problem.values(z[None] / nrm)[0])

    for idx in top:
        res = minimize(
            objective,
            starts[idx],
            method="Nelder-Mead",
            options={
                "maxiter": cfg.refine_iters,
                "xatol": 1e-9,
                "fatol": max(cfg.eig_tol * 1e-3, 1e-14),
            },
        )
        if res.fun < best_v:
            z = np.asarray(res.x, dtype=float)
            best_w = z / np.linalg.norm(z)
            best_v = float(res.fun)

    if problem.kind == "lh":
        # renormalize per block before extracting the witness
        pm = problem.parts * problem.m
        wo, q = best_w[:pm], best_w[pm:]
        best_w = np.concatenate([wo / np.linalg.norm(wo), q / np.linalg.norm(q)])
    wit = problem.witness(best_w)
    value = float(problem.values(best_w[None])[0])
    return MarginResult(value=value, witness=wit, evaluations=counter[0], certified=False)


def _make_problem(A: CoefficientTensor, kind: str, t: float, field_mode: str):
    parts = 1 if field_mode == "real" else 2
    if kind == "strong":
        return _StrongProblem(A, t, parts)
    if kind in ("lh", "legendre-hadamard"):
        return _LHProblem(A, t, parts)
    raise InputError(f"unknown condition kind: {kind}")


def strong_margin(A: CoefficientTensor, cfg: SearchConfig, extra_starts=()) -> MarginResult:
    """Estimated inf over unit (xi, omega) of the strong form at cfg.t."""
    problem = _make_problem(A, "strong", cfg.t, cfg.resolve_field(A))
    return _minimize_directions(problem, cfg, extra_starts)


def lh_margin(A: CoefficientTensor, cfg: SearchConfig, extra_starts=()) -> MarginResult:
    """Estimated inf over unit (eta, omega, q) of the direction-frozen form."""
    problem = _make_problem(A, "lh", cfg.t, cfg.resolve_field(A))
    return _minimize_directions(problem, cfg, extra_starts)


def scalar_p_margin(A: CoefficientTensor, p: float) -> float:
    """Smallest value of Re<A xi, xi + |1-2/p| conj(xi)> over unit xi in C^n.

    The conjugation map is real-linear, so this is the exact smallest
    eigenvalue of a 2n x 2n symmetric matrix; no direction search is
    involved. Requires m = 1.
    """
    if A.m != 1:
        raise InputError("scalar margin requires m = 1")
    if not p > 1.0:
        raise InputError("p must exceed 1")
    c = abs(1.0 - 2.0 / p)
    n = A.n
    G = _pairing_matrix(A.entries, 2)
    D = np.diag(np.concatenate([(1.0 + c) * np.ones(n), (1.0 - c) * np.ones(n)]))
    S = 0.5 * (D.T @ G + G.T @ D)
    return float(_eigvalsh_batch(S[None])[0, 0])


@dataclass
class WitnessPool:
    """Witnesses accumulated across t values; each contributes an exact
    quadratic t -> form value, a certified upper bound on the margin curve."""

    quadratics: list = field(default_factory=list)   # (a0, a1, a2) triples
    directions: list = field(default_factory=list)   # direction coords for warm starts

    def add(self, problem, wit: Witness):
        self.quadratics.append(problem.quadratic(wit))
        self.directions.append(_witness_direction_coords(problem, wit))

    def envelope(self, t: float) -> float:
        if not self.quadratics:
            return np.inf
        coeffs = np.asarray(self.quadratics)
        return float(np.min(coeffs[:, 0] + coeffs[:, 1] * t + coeffs[:, 2] * t * t))


def pooled_margin(A: CoefficientTensor, kind: str, cfg: SearchConfig, t: float,
                  pool: WitnessPool) -> float:
    """Margin estimate at t that folds in every pooled witness.

    Runs the standard search warm-started from the pool, adds the new
    witness, and returns the minimum of the search value and the pool
    envelope (each pooled quadratic is an exact form value, so the envelope
    only ever tightens the estimate). Once the pool is primed, later calls
    use fewer fresh starts; accuracy is carried by the shared witnesses.
    """
    cfg_t = replace(cfg, t=t)
    problem = _make_problem(A, kind, t, cfg_t.resolve_field(A))
    if pool.directions:
        starts_count = max(8, cfg.outer_starts // 4)
        polish = 1
    else:
        starts_count, polish = cfg.outer_starts, 3
    res = _minimize_directions(
        problem, cfg_t, extra_starts=pool.directions,
        starts_count=starts_count, polish=polish,
    )
    pool.add(problem, res.witness)
    return min(res.value, pool.envelope(t))


def margin_curve(A: CoefficientTensor, ts, kind: str = "strong",
                 cfg: SearchConfig = SearchConfig()) -> np.ndarray:
    """Margin estimates on a t-grid with witnesses shared across the grid.

    Sharing makes the returned curve a pointwise minimum of exact concave
    quadratics whenever the tensor is Legendre-positive on projected states,
    hence concave, which is the structural guarantee the range logic relies
    on.
    """
    ts = np.asarray(ts, dtype=float)
    pool = WitnessPool()
    raw = np.array([pooled_margin(A, kind, cfg, float(t), pool) for t in ts])
    env = np.array([pool.envelope(float(t)) for t in ts])
    return np.minimum(raw, env)
