"""Online planning by partially observable Monte-Carlo tree search.

The planner owns a tree of history nodes (visit count, mean return, belief
particles) with per-action statistics (Q, N) and children keyed by
(action, discretized observation). Each scan the tree is rebuilt from the
current root belief, n_sim simulations are run through UCB1 descent with
uniform-random rollouts at newly expanded leaves, and the root action with
maximal Q is executed. The belief is then advanced by rejection sampling
through the same black-box generator, keeping propagated particles whose
simulated observation matches the real one exactly.

The generator mirrors the radar chain seen by the planner: linear-Gaussian
motion, bin lookup, inverse-square RCS with random phase, an amplitude
estimate drawn from its asymptotic complex-normal law with the per-bin
saved scale, and the reformulated statistic 2|alpha_hat|^2/sigma_l^2
against the CFAR threshold. A detection is only emitted when the acted bin
contains the target; the reward is the bin-hit indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .arrays import AngleGrid
from .environment import MotionModel, RcsModel, angle_bins, transition_batch

EMPTY_CODE = -1


class Observation(NamedTuple):
    """Discretized scan outcome: empty, or detected with an amplitude bin."""

    detected: bool
    amplitude_bin: int

    @property
    def code(self) -> int:
        return self.amplitude_bin if self.detected else EMPTY_CODE


EMPTY_OBSERVATION = Observation(False, EMPTY_CODE)

# ordered (action, Observation) pairs accumulated over a trial; grows by
# exactly one pair per executed scan
History = list  # list[tuple[int, Observation]]


def discretize_observation(amplitude: float, beta_l: float, k_max: int) -> Observation:
    """Detected observation with amplitude bin k = min(floor(|a|/beta), k_max)."""
    if amplitude < 0 or beta_l <= 0:
        raise ValueError("amplitude must be >= 0 and beta_l > 0")
    return Observation(True, min(int(amplitude / beta_l), k_max))


@dataclass(frozen=True)
class PomcpParams:
    """Planner knobs: simulation budget, particle count, UCB1/discount/depth."""

    n_sim: int = 10_000
    n_particles: int = 10_000
    ucb_c: float = math.sqrt(2.0)
    gamma: float = 0.8
    max_depth: Optional[int] = 2
    epsilon: float = 0.01
    k_max: int = 64

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n_sim < 1 or self.n_particles < 1:
            raise ValueError("n_sim and n_particles must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def cutoff(self, depth: int) -> bool:
        if self.max_depth is not None and depth >= self.max_depth:
            return True
        return self.gamma**depth < self.epsilon


@dataclass
class BeliefSet:
    """N_p unweighted state particles approximating the posterior."""

    particles: np.ndarray
    capacity: int

    def __post_init__(self):
        self.particles = np.asarray(self.particles)
        if len(self.particles) != self.capacity:
            raise ValueError("belief must hold exactly `capacity` particles")

    def mean(self) -> np.ndarray:
        return self.particles.mean(axis=0)


class TrackLossError(RuntimeError):
    """Raised when rejection sampling cannot refill the belief."""


class RadarGenerator:
    """Black-box simulation model G(s, a) -> (s', observation, reward)."""

    def __init__(self, motion: MotionModel, grid: AngleGrid, rcs: RcsModel,
                 sigma_table: np.ndarray, beta_table: np.ndarray, lam: float,
                 k_max: int = 64, v_max: float = 0.5):
        sigma_table = np.asarray(sigma_table, dtype=float)
        beta_table = np.asarray(beta_table, dtype=float)
        if sigma_table.shape != (grid.n_bins,) or beta_table.shape != (grid.n_bins,):
            raise ValueError("sigma/beta tables must hold one entry per angle bin")
        if np.any(sigma_table <= 0):
            raise ValueError("sigma table entries must be positive")
        if not np.allclose(beta_table, np.sqrt(3.0) * sigma_table, rtol=1e-9):
            raise ValueError("beta table must equal sqrt(3) * sigma table")
        self.motion = motion
        self.grid = grid
        self.rcs = rcs
        self.sigma_table = sigma_table
        self.beta_table = beta_table
        self.lam = float(lam)
        self.k_max = int(k_max)
        self.v_max = float(v_max)
        self.n_actions = grid.n_bins
        self._sigma = sigma_table.tolist()
        self._beta = beta_table.tolist()

    def step(self, state: np.ndarray, action: int,
             rng: np.random.Generator) -> tuple[np.ndarray, Observation, float]:
        """One generator draw for a single particle.

        Scalar math throughout: this is the tree search's innermost loop.
        """
        z = rng.standard_normal(4)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        m, g = self.motion, self.grid
        dt, sig_s = m.dt, m.sigma_s
        half = 0.5 * dt * dt
        x = state[0] + dt * state[1] + half * sig_s * z[0]
        vx = state[1] + dt * sig_s * z[0]
        y = state[2] + dt * state[3] + half * sig_s * z[1]
        vy = state[3] + dt * sig_s * z[1]
        theta = math.atan2(y, x)
        if g.fov_min <= theta < g.fov_max:
            tbin = int((theta - g.fov_min) / g.bin_width + 1e-9)
            if tbin >= g.n_bins:
                tbin = g.n_bins - 1
        else:
            tbin = -1
        reward = 1.0 if tbin == action else 0.0
        r_km = math.hypot(x, y)
        scale = self.rcs.ref_range / r_km
        amp = self.rcs.ref_amplitude * scale * scale
        sigma = self._sigma[action]
        root_half = sigma * 0.7071067811865476
        ar = amp * math.cos(phase) + root_half * z[2]
        ai = amp * math.sin(phase) + root_half * z[3]
        obs = EMPTY_OBSERVATION
        if tbin == action:
            mag2 = ar * ar + ai * ai
            if 2.0 * mag2 / (sigma * sigma) >= self.lam:
                k = int(math.sqrt(mag2) / self._beta[action])
                obs = Observation(True, k if k < self.k_max else self.k_max)
        return np.array((x, vx, y, vy)), obs, reward

    def step_batch(self, states: np.ndarray, action: int,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized generator: (n,4) states -> (next, obs codes, rewards)."""
        nxt = transition_batch(states, self.motion, rng)
        bins = angle_bins(nxt[:, [0, 2]], self.grid)
        rewards = (bins == action).astype(float)
        r_km = np.hypot(nxt[:, 0], nxt[:, 2])
        amp = self.rcs.amplitude(r_km)
        phase = rng.uniform(0.0, 2.0 * np.pi, len(states))
        alpha = amp * np.exp(1j * phase)
        sigma = self.sigma_table[action]
        noise = rng.standard_normal((len(states), 2))
        alpha_hat = alpha + sigma * (noise[:, 0] + 1j * noise[:, 1]) / np.sqrt(2.0)
        lam_stat = 2.0 * np.abs(alpha_hat) ** 2 / sigma**2
        codes = np.full(len(states), EMPTY_CODE, dtype=np.int64)
        fired = (bins == action) & (lam_stat >= self.lam)
        k = np.minimum((np.abs(alpha_hat[fired]) / self.beta_table[action]).astype(np.int64),
                       self.k_max)
        codes[fired] = k
        return nxt, codes, rewards

    def jitter(self, survivors: np.ndarray, n_needed: int,
               rng: np.random.Generator) -> np.ndarray:
        """Reinvigoration: kinematic jitter around accepted particles.

        Position std is one bin arc length at each particle's range,
        velocity std is 0.05 * v_max.
        """
        idx = rng.integers(len(survivors), size=n_needed)
        out = survivors[idx].copy()
        arc = self.grid.bin_width * np.hypot(out[:, 0], out[:, 2])
        out[:, 0] += arc * rng.standard_normal(n_needed)
        out[:, 2] += arc * rng.standard_normal(n_needed)
        out[:, [1, 3]] += 0.05 * self.v_max * rng.standard_normal((n_needed, 2))
        return out


class HistoryNode:
    """One history node: visit/value stats, search belief, per-action Q/N."""

    __slots__ = ("n_visits", "value", "belief", "q", "n_a", "children")

    def __init__(self, n_actions: int):
        self.n_visits = 0
        self.value = 0.0
        self.belief: list = []
        self.q = np.zeros(n_actions)
        self.n_a = np.zeros(n_actions, dtype=np.int64)
        self.children: dict = {}


def ucb1_select(node: HistoryNode, c: float) -> int:
    """argmax_a Q + c*sqrt(ln N(h) / N(h,a)); unvisited first, ties to lowest index.

    Nodes grown by `simulate` visit actions 0..L-1 in order while any are
    unvisited, so node.n_visits is usually the next unvisited index; the
    scan below stays exact for nodes built any other way.
    """
    na = node.n_a
    k = node.n_visits
    if k < na.size and na[k] == 0:
        j = 0
        while na[j]:
            j += 1
        return j
    if not na.all():
        return int(np.argmin(na != 0))
    ucb = node.q + c * np.sqrt(math.log(max(node.n_visits, 1)) / na)
    return int(np.argmax(ucb))


def rollout(gen, state, depth: int, params: PomcpParams, rng: np.random.Generator) -> float:
    """Uniform-random-policy return estimate from `state` at `depth`."""
    if params.cutoff(depth):
        return 0.0
    action = int(rng.integers(gen.n_actions))
    nxt, _, reward = gen.step(state, action, rng)
    return reward + params.gamma * rollout(gen, nxt, depth + 1, params, rng)


def simulate(gen, state, node: HistoryNode, depth: int, params: PomcpParams,
             rng: np.random.Generator) -> float:
    """One tree-search simulation; updates counters once per visited node."""
    if params.cutoff(depth):
        return 0.0
    action = ucb1_select(node, params.ucb_c)
    nxt, obs, reward = gen.step(state, action, rng)
    key = (action, obs.code)
    child = node.children.get(key)
    if child is None:
        node.children[key] = HistoryNode(gen.n_actions)
        total = reward + params.gamma * rollout(gen, nxt, depth + 1, params, rng)
    else:
        total = reward + params.gamma * simulate(gen, nxt, child, depth + 1, params, rng)
    if depth != 0:
        node.belief.append(state)
    node.n_visits += 1
    node.n_a[action] += 1
    node.q[action] += (total - node.q[action]) / node.n_a[action]
    node.value += (total - node.value) / node.n_visits
    return total


def solve(belief: BeliefSet, gen, params: PomcpParams,
          rng: np.random.Generator, return_root: bool = False):
    """Run n_sim simulations from the root belief; return the argmax-Q action."""
    if len(belief.particles) == 0:
        raise ValueError("cannot plan from an empty belief")
    root = HistoryNode(gen.n_actions)
    particles = belief.particles
    idx = rng.integers(len(particles), size=params.n_sim)
    for i in range(params.n_sim):
        simulate(gen, particles[idx[i]], root, 0, params, rng)
    action = int(np.argmax(root.q))
    return (action, root) if return_root else action


def rejection_update(particles: np.ndarray, step_batch: Callable, target_code: int,
                     n_out: int, rng: np.random.Generator, max_proposals: int,
                     chunk: int = 0) -> tuple[np.ndarray, int, int]:
    """Generic rejection-sampling belief propagation.

    Repeatedly samples source particles (with replacement), propagates them
    through step_batch(states, rng) -> (next_states, obs_codes, rewards)
    and keeps propagated states whose code equals target_code, until n_out
    acceptances or the proposal budget runs out.

    Returns (accepted, n_accepted, n_proposed); accepted has n_accepted
    valid rows (n_accepted may be < n_out on stall).
    """
    n_src = len(particles)
    if n_src == 0:
        raise ValueError("cannot update an empty belief")
    if chunk <= 0:
        chunk = max(n_out, 1024)
    taken = []
    n_acc = 0
    n_prop = 0
    while n_acc < n_out and n_prop < max_proposals:
        m = min(chunk, max_proposals - n_prop)
        idx = rng.integers(n_src, size=m)
        nxt, codes, _ = step_batch(particles[idx], rng)
        hits = nxt[codes == target_code]
        if len(hits):
            taken.append(hits)
            n_acc += len(hits)
        n_prop += m
    if n_acc == 0:
        empty = np.empty((0,) + particles.shape[1:], dtype=particles.dtype)
        return empty, 0, n_prop
    out = np.concatenate(taken, axis=0)[:n_out]
    return out, len(out), n_prop


def update_belief(belief: BeliefSet, action: int, obs: Observation,
                  gen: RadarGenerator, rng: np.random.Generator,
                  budget_factor: int = 100) -> BeliefSet:
    """Advance the radar belief by rejection sampling through the generator.

    On a proposal-budget stall with a nonempty survivor set, the remainder
    is refilled with kinematically jittered survivors; with no survivors
    at all a TrackLossError is raised.
    """
    n_p = belief.capacity

    def _step(states, r):
        return gen.step_batch(states, action, r)

    accepted, n_acc, _ = rejection_update(
        belief.particles, _step, obs.code, n_p, rng, budget_factor * n_p)
    if n_acc == 0:
        raise TrackLossError(
            f"no particle reproduced observation {obs!r} for action {action}")
    if n_acc < n_p:
        filler = gen.jitter(accepted, n_p - n_acc, rng)
        accepted = np.concatenate([accepted, filler], axis=0)
    return BeliefSet(accepted, n_p)
