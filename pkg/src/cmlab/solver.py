"""Exact backward induction for deterministic finite-horizon bit-string MDPs.

States are enumerated in full and indexed by ``to_int``; steps run
``h = 1..H`` with ``V_{H+1} = 0``. Values are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import BitString, from_int, hamming, to_int
from .mdp import DeterministicMdp, MajorityMdpSpec

MAX_STATE_WIDTH = 22


@dataclass(frozen=True)
class TabularMdp:
    """Enumerated transition/reward tables; ``next[s, a]`` and ``reward[s, a]``."""

    state_width: int
    actions: tuple
    next: np.ndarray
    reward: np.ndarray
    horizon: int

    @property
    def num_states(self) -> int:
        return 1 << self.state_width


def tabulate(mdp: DeterministicMdp) -> TabularMdp:
    if isinstance(mdp, TabularMdp):
        return mdp
    width = mdp.state_width
    if width > MAX_STATE_WIDTH:
        raise ValueError(f"state width {width} too large to enumerate (max {MAX_STATE_WIDTH})")
    actions = tuple(mdp.actions)
    nxt = np.empty((1 << width, len(actions)), dtype=np.int64)
    rew = np.empty((1 << width, len(actions)), dtype=np.int64)
    for si in range(1 << width):
        s = from_int(si, width)
        for ai, a in enumerate(actions):
            nxt[si, ai] = to_int(mdp.transition(s, a))
            rew[si, ai] = mdp.reward(s, a)
    return TabularMdp(width, actions, nxt, rew, mdp.horizon)


@dataclass(frozen=True)
class ValueTable:
    """``v[h - 1]`` holds V_h for h = 1..H+1."""

    v: np.ndarray

    @property
    def horizon(self) -> int:
        return self.v.shape[0] - 1

    def at(self, h: int, s: BitString | int) -> int:
        si = s if isinstance(s, (int, np.integer)) else to_int(s)
        return int(self.v[h - 1, si])


@dataclass(frozen=True)
class QTable:
    """``q[h - 1, s, a]`` holds Q_h(s, a) for h = 1..H."""

    q: np.ndarray

    def at(self, h: int, s: BitString | int, ai: int) -> int:
        si = s if isinstance(s, (int, np.integer)) else to_int(s)
        return int(self.q[h - 1, si, ai])


@dataclass(frozen=True)
class PolicyTable:
    """``pi[h - 1, s]`` is the chosen action index at step h."""

    pi: np.ndarray


def backward_induction(mdp: DeterministicMdp) -> tuple[ValueTable, QTable]:
    tab = tabulate(mdp)
    H = tab.horizon
    v = np.zeros((H + 1, tab.num_states), dtype=np.int64)
    q = np.zeros((H, tab.num_states, len(tab.actions)), dtype=np.int64)
    for h in range(H, 0, -1):
        q[h - 1] = tab.reward + v[h][tab.next]
        v[h - 1] = q[h - 1].max(axis=1)
    return ValueTable(v), QTable(q)


def q_from_v(mdp: DeterministicMdp, V: ValueTable) -> QTable:
    """Q_h(s,a) = r(s,a) + V_{h+1}(T(s,a)) for every h."""
    tab = tabulate(mdp)
    return QTable(tab.reward[None, :, :] + V.v[1:][:, tab.next])


def bellman_residual(mdp: DeterministicMdp, V: ValueTable, Q: QTable) -> int:
    """Largest violation of either Bellman optimality equation."""
    tab = tabulate(mdp)
    q_res = np.abs(Q.q - (tab.reward[None] + V.v[1:][:, tab.next])).max()
    v_res = np.abs(V.v[:-1] - Q.q.max(axis=2)).max()
    terminal = np.abs(V.v[-1]).max()
    return int(max(q_res, v_res, terminal))


def optimal_policy(Q: QTable) -> PolicyTable:
    # argmax returns the first maximiser, i.e. the smallest action index
    return PolicyTable(Q.q.argmax(axis=2))


def rollout(mdp: DeterministicMdp, policy: PolicyTable, s0: BitString, H: int | None = None) -> list:
    """Follow ``policy`` for H steps; returns ``[(s, a, r), ...]``."""
    tab = tabulate(mdp)
    H = tab.horizon if H is None else H
    if s0.width != tab.state_width:
        raise ValueError(f"start state width {s0.width} != {tab.state_width}")
    si = to_int(s0)
    out = []
    for h in range(1, H + 1):
        ai = int(policy.pi[h - 1, si])
        out.append((from_int(si, tab.state_width), tab.actions[ai], int(tab.reward[si, ai])))
        si = int(tab.next[si, ai])
    return out


def optimal_state_distribution(
    mdp: DeterministicMdp, policy: PolicyTable, initial: dict[BitString, float]
) -> dict[tuple[int, int], float]:
    """Time-uniform occupancy of (state index, action index) pairs.

    Each start state contributes its weight spread evenly over the H steps
    of its rollout.
    """
    total = sum(initial.values())
    if not np.isclose(total, 1.0):
        raise ValueError(f"initial weights sum to {total}, expected 1")
    tab = tabulate(mdp)
    H = tab.horizon
    occ: dict[tuple[int, int], float] = {}
    for s0, w in initial.items():
        si = to_int(s0)
        for h in range(1, H + 1):
            ai = int(policy.pi[h - 1, si])
            occ[(si, ai)] = occ.get((si, ai), 0.0) + w / H
            si = int(tab.next[si, ai])
    return occ


# -- closed forms ----------------------------------------------------------------------


def value_closed_form_unconditioned(spec: MajorityMdpSpec, s: BitString) -> int:
    """n + 1 minus the number of representation bits that differ from s_reward."""
    ctrl, rep = spec.split(s)
    if ctrl.count() != 0:
        raise ValueError("closed form only holds when the control bits are 0_b")
    return spec.n + 1 - hamming(rep, spec.s_reward)


def in_conditioned_slice(spec: MajorityMdpSpec, free: list[int], s: BitString) -> bool:
    ctrl, rep = spec.split(s)
    if ctrl.count() != 0:
        return False
    inside = set(free)
    return all(rep[i - 1] == spec.s_reward[i - 1] for i in range(1, spec.n + 1) if i not in inside)


def value_closed_form_conditioned(spec: MajorityMdpSpec, free: list[int], s: BitString) -> int:
    """n + 1 minus the mismatches inside the free set ``free`` (1-based indices)."""
    if len(free) != (1 << (spec.b - 1)) - 1:
        raise ValueError(f"free set must have {(1 << (spec.b - 1)) - 1} elements")
    if spec.condition is not None:
        if spec.condition.variables() & set(free):
            raise ValueError("condition depends on a variable in the free set")
        if not spec.condition(spec.s_reward):
            raise ValueError("condition does not hold at s_reward")
    if not in_conditioned_slice(spec, free, s):
        raise ValueError("state is outside the restricted slice")
    _, rep = spec.split(s)
    return spec.n + 1 - sum(rep[i - 1] != spec.s_reward[i - 1] for i in free)


def uncorrected_value(spec: MajorityMdpSpec, s: BitString) -> int:
    """The literal formula counting matching bits: n + 1 - #{i : s_{b+i} == s_reward,i}.

    Kept only to document how it differs from the exact values.
    """
    _, rep = spec.split(s)
    return spec.n + 1 - (spec.n - hamming(rep, spec.s_reward))
