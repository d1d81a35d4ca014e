"""Time stepping for linear split problems with any multistep coefficient set.

The implicit stage of every step solves the shifted linear system
(a_0 I - dt c_0 G) y_new = rhs. Implicit operators are restricted to linear
ones, so the solve is direct: scalar division, a dense solve, or the cyclic
tridiagonal fast path for periodic three-point stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .schemes import CoefficientSet

__all__ = [
    "StepFailureError",
    "BlowUpError",
    "ZeroOperator",
    "ScalarOperator",
    "DenseOperator",
    "CirculantOperator",
    "LinearSplitOperator",
    "SplitProblem",
    "History",
    "Trajectory",
    "solve_cyclic_tridiagonal",
    "step",
    "start",
    "integrate",
    "empirical_stability",
    "trajectory_to_csv",
    "diagnostics_to_csv",
]

BLOWUP_LIMIT = 1e12


class StepFailureError(RuntimeError):
    """The implicit stage system is singular (or numerically so)."""


class BlowUpError(RuntimeError):
    """The solution norm exceeded the overflow guard during integration."""

    def __init__(self, step_index: int, norm: float):
        super().__init__(f"blow-up detected at step {step_index}: max norm {norm:.3e}")
        self.step_index = step_index
        self.norm = norm


# ---------------------------------------------------------------------------
# Linear operators
# ---------------------------------------------------------------------------

class ZeroOperator:
    """The absent half of a split problem."""

    def apply(self, v):
        return np.zeros_like(v)

    def solve_shifted(self, alpha, beta, rhs):
        return rhs / alpha

    def __bool__(self):
        return False


class ScalarOperator:
    """Multiplication by a (possibly complex) scalar."""

    def __init__(self, coef):
        self.coef = coef

    def apply(self, v):
        return self.coef * v

    def solve_shifted(self, alpha, beta, rhs):
        den = alpha - beta * self.coef
        if abs(den) < 1e-14 * max(1.0, abs(alpha), abs(beta * self.coef)):
            raise StepFailureError("singular implicit system: a_0 - dt c_0 mu ~ 0")
        return rhs / den

    def __bool__(self):
        return self.coef != 0


class DenseOperator:
    """A dense matrix operator for small systems."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix)

    def apply(self, v):
        return self.matrix @ v

    def solve_shifted(self, alpha, beta, rhs):
        n = self.matrix.shape[0]
        try:
            return np.linalg.solve(alpha * np.eye(n) - beta * self.matrix, rhs)
        except np.linalg.LinAlgError as exc:
            raise StepFailureError(f"singular implicit system: {exc}") from exc

    def __bool__(self):
        return bool(np.any(self.matrix))


class CirculantOperator:
    """A periodic stencil operator: (T u)_j = sum_k w_k u_{j + o_k}.

    Shifted solves use the cyclic tridiagonal path when the stencil fits in
    {-1, 0, +1} and an FFT diagonalization otherwise.
    """

    def __init__(self, offsets, weights, n):
        self.offsets = tuple(int(o) for o in offsets)
        self.weights = tuple(float(w) for w in weights)
        self.n = int(n)

    def apply(self, v):
        out = np.zeros_like(v)
        for o, w in zip(self.offsets, self.weights):
            if w != 0.0:
                out += w * np.roll(v, -o)
        return out

    def symbol(self, phi):
        """Eigenvalue on the Fourier mode u_j = exp(i phi j)."""
        phi = np.asarray(phi, dtype=float)
        acc = np.zeros(np.shape(phi), dtype=complex)
        for o, w in zip(self.offsets, self.weights):
            acc = acc + w * np.exp(1j * phi * o)
        return acc if acc.shape else complex(acc)

    def solve_shifted(self, alpha, beta, rhs):
        if all(o in (-1, 0, 1) for o in self.offsets):
            w = {o: 0.0 for o in (-1, 0, 1)}
            for o, wt in zip(self.offsets, self.weights):
                w[o] += wt
            n = self.n
            sub = np.full(n, -beta * w[-1])
            diag = np.full(n, alpha - beta * w[0])
            sup = np.full(n, -beta * w[1])
            return solve_cyclic_tridiagonal(sub, diag, sup, rhs)
        eig = alpha - beta * self.symbol(2 * np.pi * np.arange(self.n) / self.n)
        if np.abs(eig).min() < 1e-14 * max(1.0, np.abs(eig).max()):
            raise StepFailureError("singular implicit system: circulant eigenvalue ~ 0")
        x = np.fft.ifft(np.fft.fft(rhs) / eig)
        if not np.iscomplexobj(rhs):
            x = x.real
        return x

    def __bool__(self):
        return any(w != 0.0 for w in self.weights)


def _thomas(sub, diag, sup, rhs):
    """Standard tridiagonal elimination; sub[0] and sup[-1] are ignored."""
    n = len(diag)
    cp = np.empty(n, dtype=np.result_type(diag, rhs))
    dp = np.empty(n, dtype=np.result_type(diag, rhs))
    cp[0] = sup[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for j in range(1, n):
        den = diag[j] - sub[j] * cp[j - 1]
        if den == 0:
            raise StepFailureError("singular tridiagonal system")
        cp[j] = sup[j] / den
        dp[j] = (rhs[j] - sub[j] * dp[j - 1]) / den
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for j in range(n - 2, -1, -1):
        x[j] = dp[j] - cp[j] * x[j + 1]
    return x


def solve_cyclic_tridiagonal(sub, diag, sup, rhs):
    """Solve the periodic tridiagonal system
    sub[j] x_{j-1} + diag[j] x_j + sup[j] x_{j+1} = rhs[j] (indices mod n).

    sub[0] and sup[-1] are the corner entries. Thomas elimination plus a
    Sherman-Morrison rank-one correction for the corners.
    """
    sub = np.asarray(sub)
    diag = np.asarray(diag)
    sup = np.asarray(sup)
    rhs = np.asarray(rhs)
    n = len(diag)
    if n < 3:
        m = np.zeros((n, n), dtype=np.result_type(diag, rhs))
        for j in range(n):
            m[j, j] += diag[j]
            m[j, (j - 1) % n] += sub[j]
            m[j, (j + 1) % n] += sup[j]
        return np.linalg.solve(m, rhs)
    corner_top = sub[0]
    corner_bot = sup[-1]
    if corner_top == 0 and corner_bot == 0:
        return _thomas(sub, diag, sup, rhs)
    gamma = -diag[0] if diag[0] != 0 else 1.0
    d = diag.astype(np.result_type(diag, rhs), copy=True)
    d[0] -= gamma
    d[-1] -= corner_top * corner_bot / gamma
    u = np.zeros(n, dtype=d.dtype)
    u[0] = gamma
    u[-1] = corner_bot
    y = _thomas(sub, d, sup, rhs)
    q = _thomas(sub, d, sup, u)
    # v = (1, 0, ..., 0, corner_top / gamma)
    fac = (y[0] + corner_top * y[-1] / gamma) / (1.0 + q[0] + corner_top * q[-1] / gamma)
    return y - fac * q


# ---------------------------------------------------------------------------
# Problems and state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSplitOperator:
    """The two halves F (explicit) and G (implicit) of y' = F y + G y."""

    explicit: object
    implicit: object
    dimension: int


@dataclass(frozen=True)
class SplitProblem:
    """A linear split initial-value problem, optionally with an exact solution.

    exact, when present, maps a time t to the state vector at t.
    """

    operator: LinearSplitOperator
    y0: np.ndarray
    t0: float = 0.0
    exact: object = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "y0", np.atleast_1d(np.asarray(self.y0)))


@dataclass
class History:
    """Ring buffers of the newest k levels; index 0 is the newest level n."""

    k: int
    y: list
    f: list
    g: list
    t: float
    dt: float

    def __post_init__(self):
        if not (len(self.y) == len(self.f) == len(self.g) == self.k):
            raise ValueError(f"history must hold exactly k={self.k} levels")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def push(self, y_new, f_new, g_new):
        self.y.insert(0, y_new)
        self.f.insert(0, f_new)
        self.g.insert(0, g_new)
        self.y.pop()
        self.f.pop()
        self.g.pop()
        self.t += self.dt


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

def step(s: CoefficientSet, h: History, op: LinearSplitOperator):
    """Advance one step: solve (a_0 I - dt c_0 G) y_new = rhs and push.

    rhs collects the k stored levels with their a, b, c weights; b_0 = 0 by
    construction so no new explicit evaluation enters the solve.
    """
    if h.k != s.k:
        raise ValueError(f"history holds {h.k} levels but the scheme needs {s.k}")
    a = s.a_array()
    b = s.b_array()
    c = s.c_array()
    if a[0] == 0:
        raise ValueError("a_0 must be nonzero")
    dt = h.dt
    rhs = np.zeros_like(h.y[0])
    for i in range(1, s.k + 1):
        lvl = i - 1  # level n+1-i sits at history index i-1
        if a[i] != 0:
            rhs = rhs - a[i] * h.y[lvl]
        if b[i] != 0:
            rhs = rhs + dt * b[i] * h.f[lvl]
        if c[i] != 0:
            rhs = rhs + dt * c[i] * h.g[lvl]
    y_new = op.implicit.solve_shifted(a[0], dt * c[0], rhs)
    h.push(y_new, op.explicit.apply(y_new), op.implicit.apply(y_new))
    return y_new


def start(problem: SplitProblem, s: CoefficientSet, dt: float,
          mode: str = "exact", refine: int | None = None) -> History:
    """Fill the k starting levels at t0, t0+dt, ..., t0+(k-1)dt.

    exact mode samples the problem's exact solution. euler_bootstrap takes
    r forward/backward Euler substeps of size dt/r per level, with
    r = ceil(1/sqrt(dt)) by default, which keeps the start error below the
    scheme's own second-order global error.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    op = problem.operator
    if mode == "exact":
        if problem.exact is None:
            raise ValueError("exact start requested but the problem has no exact solution")
        ys = [np.atleast_1d(np.asarray(problem.exact(problem.t0 + j * dt)))
              for j in range(s.k)]
    elif mode == "euler_bootstrap":
        r = refine if refine is not None else max(1, math.ceil(1.0 / math.sqrt(dt)))
        sub_dt = dt / r
        y = problem.y0.copy()
        ys = [y]
        for _ in range(s.k - 1):
            for _ in range(r):
                rhs = y + sub_dt * op.explicit.apply(y)
                y = op.implicit.solve_shifted(1.0, sub_dt, rhs)
            ys.append(y)
    else:
        raise ValueError(f"unknown start mode: {mode!r}")
    ys = ys[::-1]  # newest first
    return History(
        k=s.k,
        y=list(ys),
        f=[op.explicit.apply(y) for y in ys],
        g=[op.implicit.apply(y) for y in ys],
        t=problem.t0 + (s.k - 1) * dt,
        dt=dt,
    )


def integrate(problem: SplitProblem, s: CoefficientSet, t_end: float, dt: float,
              start_mode: str = "exact", refine: int | None = None,
              on_blowup: str = "raise") -> Trajectory:
    """Repeated stepping from t0 to t_end, recording per-level diagnostics.

    When the max norm passes the overflow guard, raises BlowUpError with the
    step index (empirical stability probing relies on that), or truncates the
    trajectory there with on_blowup="truncate" (used by beyond-CFL probes).
    """
    from .problems import total_variation

    if not t_end > problem.t0:
        raise ValueError("t_end must exceed t0")
    if on_blowup not in ("raise", "truncate"):
        raise ValueError(f"unknown blow-up policy: {on_blowup!r}")
    n_total = (t_end - problem.t0) / dt
    if abs(n_total - round(n_total)) > 1e-8 * max(1.0, abs(n_total)):
        raise ValueError(f"(t_end - t0)/dt = {n_total} is not close to an integer")
    n_total = round(n_total)
    if n_total + 1 < s.k:
        raise ValueError("interval too short for the starting levels")

    h = start(problem, s, dt, start_mode, refine)
    times = [problem.t0 + j * dt for j in range(s.k)]
    states = list(reversed([y.copy() for y in h.y]))
    for j in range(s.k - 1, n_total):
        y = step(s, h, problem.operator)
        times.append(problem.t0 + (j + 1) * dt)
        states.append(y.copy())
        norm = float(np.max(np.abs(y)))
        if not np.isfinite(norm) or norm > BLOWUP_LIMIT:
            if on_blowup == "raise":
                raise BlowUpError(j + 1, norm)
            break
    diagnostics = {
        "max_norm": np.array([float(np.max(np.abs(u))) for u in states]),
        "total_variation": np.array([total_variation(u) for u in states]),
    }
    return Trajectory(np.array(times), states, diagnostics)


def empirical_stability(s: CoefficientSet, lam: complex, mu: complex,
                        n_steps: int = 800) -> bool:
    """Probe the scalar test problem y' = lam*y + mu*y with unit step size.

    Starting data is the exact solution plus a small alternating perturbation
    so every characteristic mode is excited at a known level; the scheme is
    called stable when the max norm never passes 1e3 times the starting
    scale. Away from the stability boundary this agrees with root_condition.
    """
    if n_steps < 100:
        raise ValueError("need at least 100 steps")
    from .problems import dahlquist

    problem = dahlquist(lam, mu)
    op = problem.operator
    rate = lam + mu
    ys = []
    for j in range(s.k):
        val = np.exp(rate * j) + 1e-6 * (-1) ** j
        ys.append(np.array([val], dtype=complex))
    ys = ys[::-1]
    h = History(
        k=s.k,
        y=list(ys),
        f=[op.explicit.apply(y) for y in ys],
        g=[op.implicit.apply(y) for y in ys],
        t=float(s.k - 1),
        dt=1.0,
    )
    scale = max(1.0, max(float(np.abs(y[0])) for y in ys))
    threshold = 1e3 * scale
    for _ in range(n_steps):
        try:
            y = step(s, h, op)
        except StepFailureError:
            return False
        m = float(np.abs(y[0]))
        if not np.isfinite(m) or m > BLOWUP_LIMIT:
            return False
        if m > threshold:
            return False
    return True


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.12g}"


def trajectory_to_csv(traj: Trajectory, fh) -> None:
    """Rows t,<state components...> (complex states expand to re/im pairs)."""
    dim = len(traj.states[0])
    if np.iscomplexobj(traj.states[0]):
        cols = ",".join(f"y{i}_re,y{i}_im" for i in range(dim))
        fh.write(f"t,{cols}\n")
        for t, u in zip(traj.times, traj.states):
            vals = ",".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in u)
            fh.write(f"{_fmt(t)},{vals}\n")
    else:
        cols = ",".join(f"y{i}" for i in range(dim))
        fh.write(f"t,{cols}\n")
        for t, u in zip(traj.times, traj.states):
            fh.write(f"{_fmt(t)},{','.join(_fmt(v) for v in u)}\n")


def diagnostics_to_csv(traj: Trajectory, fh) -> None:
    fh.write("t,max_norm,total_variation\n")
    for t, mn, tv in zip(traj.times, traj.diagnostics["max_norm"],
                         traj.diagnostics["total_variation"]):
        fh.write(f"{_fmt(t)},{_fmt(mn)},{_fmt(tv)}\n")
