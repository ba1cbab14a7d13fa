"""Closed-loop assembly, fixed-step simulation, and deviation metrics.

The feedback structure is y = G(u - f L y): each node realization is
stacked block-diagonally, the coupling dynamics f is realized once per
channel acting on L y, and any direct-feedthrough algebraic loop is
eliminated before integration.  Simulation uses fixed-step RK4 from zero
initial state for reproducible outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlgebraicLoopSingularError,
    LengthMismatchError,
    MissingReferenceError,
    UnstableModelError,
)
from .netfreq import FrequencyRegion, NetworkModel, coherent_dynamics
from .ratfun import RationalFunction, StateSpaceModel

__all__ = [
    "InputSignal",
    "SimulationResult",
    "StabilityCertificate",
    "assemble_closed_loop",
    "simulate",
    "coherent_reference",
    "deviation_metrics",
    "coi_frequency",
    "stability_check",
    "coherence_experiment",
    "frequency_dependence_experiment",
]

_UNSTABLE_TOL = 1e-6
_MARGINAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class InputSignal:
    """Input family: step 1/s, sinusoid sin(alpha t), or exponential
    approach alpha/(s(s+alpha)), each times a fixed shape vector u0."""

    family: str
    shape: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        if self.family not in ("step", "sinusoid", "exp_approach"):
            raise ValueError(f"unknown input family {self.family!r}")
        object.__setattr__(self, "shape", np.atleast_1d(np.asarray(self.shape, float)))
        if self.family in ("sinusoid", "exp_approach") and self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    def __call__(self, t: float) -> np.ndarray:
        if self.family == "step":
            return self.shape if t >= 0 else 0.0 * self.shape
        if self.family == "sinusoid":
            return math.sin(self.alpha * t) * self.shape
        return (1.0 - math.exp(-self.alpha * t)) * self.shape


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Sampled node outputs plus optional coherent / COI references."""

    times: np.ndarray
    node_outputs: np.ndarray  # n x T
    coherent_output: np.ndarray | None = None
    coi_output: np.ndarray | None = None

    @property
    def deviation_linf(self) -> float:
        if self.coherent_output is None:
            raise MissingReferenceError("no coherent reference in this result")
        return float(np.max(np.abs(self.node_outputs - self.coherent_output)))


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    stable: bool
    max_re_eigenvalue: float
    gamma_hinf: float | None = None


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def assemble_closed_loop(net: NetworkModel) -> StateSpaceModel:
    """Composite realization of u -> y for y = G(u - f L y)."""
    L = net.laplacian.entries
    n = net.n
    node_ss = [g.to_state_space() for g in net.nodes]
    f_ss = net.coupling.to_state_space()

    Ag = _block_diag([m.A for m in node_ss])
    Bg = _block_diag([m.B for m in node_ss])
    Cg = _block_diag([m.C for m in node_ss])
    Dg = np.diag([m.D[0, 0] for m in node_ss])

    kf = f_ss.order
    Af = _block_diag([f_ss.A] * n) if kf else np.zeros((0, 0))
    Bf = _block_diag([f_ss.B] * n) if kf else np.zeros((0, n))
    Cf = _block_diag([f_ss.C] * n) if kf else np.zeros((n, 0))
    Df = f_ss.D[0, 0] * np.eye(n)

    loop = np.eye(n) + Dg @ Df @ L
    if np.linalg.cond(loop) > 1e12:
        raise AlgebraicLoopSingularError(
            "direct-feedthrough loop I + D_G D_F L is singular"
        )
    W = np.linalg.inv(loop)

    ng = Ag.shape[0]
    nf = Af.shape[0]
    # y = Cy x + Dy u with x = [x_g; x_f]
    Cy = np.hstack([W @ Cg, -W @ Dg @ Cf])
    Dy = W @ Dg

    A = np.zeros((ng + nf, ng + nf))
    A[:ng, :ng] = Ag
    A[:ng, ng:] = -Bg @ Cf
    A[ng:, ng:] = Af
    A[:ng, :] += -Bg @ Df @ L @ Cy
    A[ng:, :] += Bf @ L @ Cy

    B = np.zeros((ng + nf, n))
    B[:ng, :] = Bg @ (np.eye(n) - Df @ L @ Dy)
    B[ng:, :] = Bf @ L @ Dy
    return StateSpaceModel(A, B, Cy, Dy)


def simulate(model: StateSpaceModel, input_signal: InputSignal,
             t_end: float, dt: float | None = None) -> SimulationResult:
    """Fixed-step RK4 integration of x' = Ax + Bu(t) from zero state."""
    A, B, C, D = model.A, model.B, model.C, model.D
    eigs = np.linalg.eigvals(A) if model.order else np.array([0.0])
    if model.order and np.max(eigs.real) > _UNSTABLE_TOL:
        raise UnstableModelError(
            f"state matrix has eigenvalue with Re = {np.max(eigs.real):.3g}"
        )
    if dt is None:
        fastest = np.max(np.abs(eigs)) if model.order else 0.0
        dt = min(1e-2, 0.1 / fastest) if fastest > 0 else 1e-2
    if dt <= 0 or t_end <= dt:
        raise ValueError("need dt > 0 and t_end > dt")

    steps = int(round(t_end / dt))
    times = np.arange(steps + 1) * dt
    x = np.zeros(model.order)
    u0 = np.asarray(input_signal(0.0), float)
    ys = np.empty((C.shape[0], steps + 1))
    ys[:, 0] = C @ x + D @ u0

    def deriv(t, xv):
        return A @ xv + B @ np.asarray(input_signal(t), float)

    for k in range(steps):
        t = times[k]
        k1 = deriv(t, x)
        k2 = deriv(t + dt / 2, x + dt / 2 * k1)
        k3 = deriv(t + dt / 2, x + dt / 2 * k2)
        k4 = deriv(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[:, k + 1] = C @ x + D @ np.asarray(input_signal(times[k + 1]), float)
    return SimulationResult(times=times, node_outputs=ys)


def coherent_reference(net: NetworkModel, input_signal: InputSignal,
                       t_end: float, dt: float) -> np.ndarray:
    """Response of gbar(s) to the averaged scalar input (1^T u(t))/n."""
    gbar = coherent_dynamics(net)
    model = gbar.to_state_space()
    mean_shape = np.array([float(np.sum(input_signal.shape)) / net.n])
    scalar_input = InputSignal(input_signal.family, mean_shape, input_signal.alpha)
    res = simulate(model, scalar_input, t_end, dt)
    return res.node_outputs[0]


def deviation_metrics(result: SimulationResult) -> tuple[float, np.ndarray]:
    """Per-node sup_t |y_i - ybar| and the max over nodes."""
    if result.coherent_output is None:
        raise MissingReferenceError("coherent reference output missing")
    per_node = np.max(np.abs(result.node_outputs - result.coherent_output), axis=1)
    return float(np.max(per_node)), per_node


def coi_frequency(result: SimulationResult, inertias) -> np.ndarray:
    """Center-of-inertia output (sum m_i y_i) / (sum m_i)."""
    m = np.asarray(inertias, float)
    if m.shape[0] != result.node_outputs.shape[0]:
        raise LengthMismatchError(
            f"{m.shape[0]} inertias for {result.node_outputs.shape[0]} nodes"
        )
    return (m @ result.node_outputs) / np.sum(m)


def _pbh_in_y_path(model: StateSpaceModel, lam: complex) -> bool:
    """True when eigenvalue lam is both controllable and observable."""
    n = model.order
    ctrl = np.hstack([model.A - lam * np.eye(n), model.B])
    obs = np.vstack([model.A - lam * np.eye(n), model.C])
    tol = 1e-8 * max(1.0, float(np.linalg.norm(model.A)))
    s_ctrl = np.linalg.svd(ctrl, compute_uv=False)
    s_obs = np.linalg.svd(obs, compute_uv=False)
    return s_ctrl[-1] > tol and s_obs[-1] > tol


def stability_check(model: StateSpaceModel,
                    freq_grid: FrequencyRegion | None = None,
                    ) -> StabilityCertificate:
    """Eigenvalue-based stability certificate with an H-infinity grid estimate.

    Marginal integrator modes (|lambda| < 1e-9) are excluded when a PBH test
    shows them uncontrollable or unobservable in the y-path.
    """
    if model.order == 0:
        eigs = np.array([])
    else:
        eigs = np.linalg.eigvals(model.A)
    relevant = []
    for lam in eigs:
        if abs(lam) < _MARGINAL_TOL and not _pbh_in_y_path(model, lam):
            continue
        relevant.append(lam)
    max_re = max((l.real for l in relevant), default=-math.inf)
    stable = max_re < -_MARGINAL_TOL
    gamma = None
    if freq_grid is not None:
        gamma = max(
            float(np.linalg.norm(model.response(s), 2))
            for s in freq_grid.points()
        )
    return StabilityCertificate(stable=stable, max_re_eigenvalue=float(max_re),
                                gamma_hinf=gamma)


def coherence_experiment(net: NetworkModel, input_signal: InputSignal,
                         t_end: float, dt: float,
                         inertias=None) -> SimulationResult:
    """Simulate the closed loop and attach the coherent (and COI) references."""
    model = assemble_closed_loop(net)
    res = simulate(model, input_signal, t_end, dt)
    ybar = coherent_reference(net, input_signal, t_end, dt)
    coi = None
    full = SimulationResult(times=res.times, node_outputs=res.node_outputs,
                            coherent_output=ybar)
    if inertias is not None:
        coi = coi_frequency(full, inertias)
        full = SimulationResult(times=res.times, node_outputs=res.node_outputs,
                                coherent_output=ybar, coi_output=coi)
    return full


def frequency_dependence_experiment(net: NetworkModel, alphas_sin: list[float],
                                    t_end: float, dt: float,
                                    shape=None) -> list[tuple[float, float]]:
    """L-infinity deviation from the coherent response per sinusoid frequency.

    Requires integrator coupling f = 1/s, the setting where low-frequency
    inputs force coherence.
    """
    integrator = RationalFunction([1], [0, 1])
    if net.coupling != integrator:
        raise ValueError("frequency dependence experiment requires f = 1/s")
    if net.laplacian.lambda2 <= 0:
        raise ValueError("network must be connected")
    if shape is None:
        shape = np.zeros(net.n)
        shape[min(1, net.n - 1)] = -1.0
    rows = []
    for alpha in alphas_sin:
        sig = InputSignal("sinusoid", shape, alpha)
        res = coherence_experiment(net, sig, t_end, dt)
        rows.append((float(alpha), res.deviation_linf))
    return rows
