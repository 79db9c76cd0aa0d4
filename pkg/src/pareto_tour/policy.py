"""REINFORCE actor with preference features, critic baseline, and multiplier
ascent: the desk-scale training loop.

The actor is a linear-softmax policy over per-candidate edge features rather
than a deep encoder-decoder, so gradients are exact and auditable. Tours are
decoded autoregressively from city 0; at each step the policy scores the
unvisited cities and samples from the softmax.

Feature schema v1, score(next j | current i, preference w):
    [d1(i,j), d2(i,j), w1*d1, w2*d2, w2*d1, w1*d2,
     sum/min/max of j's edge weights per objective, bias]
with distances min-max normalized per instance. The four preference
interaction terms stand in for a preference embedding; schema "v1-noprefs"
zeroes them (the ablation variant), leaving the policy blind to w.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import (
    BTSPInstance,
    ObjectiveVector,
    ParetoArchive,
    Tour,
    evaluate,
)
from .decomposition import (
    MultiplierState,
    PreferenceSet,
    PreferenceVector,
    cone_constraint,
    generate_preferences,
    lagrangian_reward,
    update_multipliers,
)
from .errors import DivergenceError, InvalidInputError

FEATURE_SCHEMA_FULL = "v1"
FEATURE_SCHEMA_NO_PREFS = "v1-noprefs"
_SCHEMAS = (FEATURE_SCHEMA_FULL, FEATURE_SCHEMA_NO_PREFS)
FEATURE_DIM = 13
CRITIC_DIM = 9
CHECKPOINT_SCHEMA_VERSION = 1


def _frozen_vector(values: Sequence[float] | np.ndarray, dim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (dim,):
        raise InvalidInputError(f"{name} must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PolicyParams:
    """Weights of the linear scoring function over candidate features."""

    theta: np.ndarray
    feature_schema: str = FEATURE_SCHEMA_FULL

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", _frozen_vector(self.theta, FEATURE_DIM, "theta"))
        if self.feature_schema not in _SCHEMAS:
            raise InvalidInputError(f"unknown feature schema {self.feature_schema!r}")

    @classmethod
    def zeros(cls, feature_schema: str = FEATURE_SCHEMA_FULL) -> "PolicyParams":
        return cls(np.zeros(FEATURE_DIM), feature_schema)

    @property
    def uses_preferences(self) -> bool:
        return self.feature_schema == FEATURE_SCHEMA_FULL


@dataclass(frozen=True)
class CriticParams:
    """Weights of the linear reward baseline over (preference, instance) features."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", _frozen_vector(self.phi, CRITIC_DIM, "phi"))

    @classmethod
    def zeros(cls) -> "CriticParams":
        return cls(np.zeros(CRITIC_DIM))


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 2000
    batch_size: int = 8
    K: int = 20
    eta_actor: float = 1e-2
    eta_critic: float = 1e-2
    # Ascent rate sized for K*B constraint sums per iteration over ~2000
    # iterations; the search solver's per-round default would saturate the
    # multipliers long before training ends.
    alpha: float = 1e-3
    lambda_min: float = 0.0
    lambda_max: float = 50.0
    seed: int = 0
    preference_features: bool = True

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise InvalidInputError("iterations must be >= 0")
        if min(self.batch_size, self.K) < 1:
            raise InvalidInputError("batch_size and K must be >= 1")
        if min(self.eta_actor, self.eta_critic, self.alpha) <= 0:
            raise InvalidInputError("learning rates and alpha must be > 0")


@dataclass(frozen=True)
class InstancePack:
    """Precomputed per-instance featurization shared across preferences."""

    inst: BTSPInstance
    d1n: np.ndarray  # min-max normalized distance matrices
    d2n: np.ndarray
    nf: np.ndarray  # (n, 6) per-city sum/min/max of normalized weights, both objectives
    critic_base: np.ndarray  # (6,) mean/min/max of raw off-diagonal weights, both objectives

    @property
    def n(self) -> int:
        return self.d1n.shape[0]


def _normalize_offdiag(d: np.ndarray) -> np.ndarray:
    off = ~np.eye(d.shape[0], dtype=bool)
    lo, hi = d[off].min(), d[off].max()
    if hi <= lo:
        return np.zeros_like(d)
    out = (d - lo) / (hi - lo)
    np.fill_diagonal(out, 0.0)
    return out


def _row_stats(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    rows = d[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    return np.column_stack([rows.sum(axis=1), rows.min(axis=1), rows.max(axis=1)])


def featurize(inst: BTSPInstance) -> InstancePack:
    d1, d2 = inst.distance_matrix(0), inst.distance_matrix(1)
    d1n, d2n = _normalize_offdiag(d1), _normalize_offdiag(d2)
    nf = np.hstack([_row_stats(d1n), _row_stats(d2n)])
    off = ~np.eye(inst.n, dtype=bool)
    o1, o2 = d1[off], d2[off]
    base = np.array([o1.mean(), o1.min(), o1.max(), o2.mean(), o2.min(), o2.max()])
    return InstancePack(inst, d1n, d2n, nf, base)


def critic_features(w: PreferenceVector, pack: InstancePack) -> np.ndarray:
    """[w1, w2, mean/min/max of each objective's edge weights, n]."""
    return np.concatenate([[w.w1, w.w2], pack.critic_base, [float(pack.n)]])


@dataclass
class Step:
    current: int
    candidates: np.ndarray
    probs: np.ndarray
    chosen: int  # position within candidates


@dataclass
class TourTrace:
    """Per-step decode record: everything needed to rebuild log p and its gradient."""

    log_prob: float
    steps: list[Step]
    pack: InstancePack
    w: PreferenceVector
    feature_schema: str


def _score_matrix(policy: PolicyParams, pack: InstancePack, w: PreferenceVector) -> np.ndarray:
    t = policy.theta
    if policy.uses_preferences:
        c1 = t[0] + t[2] * w.w1 + t[4] * w.w2
        c2 = t[1] + t[3] * w.w2 + t[5] * w.w1
    else:
        c1, c2 = t[0], t[1]
    return c1 * pack.d1n + c2 * pack.d2n + (pack.nf @ t[6:12])[None, :] + t[12]


def _decode(
    policy: PolicyParams,
    pack: InstancePack,
    w: PreferenceVector,
    rng: np.random.Generator | None = None,
    forced: Sequence[int] | None = None,
) -> tuple[Tour, TourTrace]:
    """Autoregressive decode: sample (rng), greedy (rng=None), or teacher-forced."""
    scores = _score_matrix(policy, pack, w)
    n = pack.n
    order = [0]
    remaining = list(range(1, n))
    log_prob = 0.0
    steps: list[Step] = []
    cur = 0
    while remaining:
        cands = np.array(remaining)
        z = scores[cur, cands]
        z = z - z.max()
        e = np.exp(z)
        p = e / e.sum()
        if forced is not None:
            pos = remaining.index(forced[len(order)])
        elif rng is None:
            pos = int(p.argmax())  # greedy; ties resolve to the lowest city index
        else:
            pos = min(int(np.searchsorted(np.cumsum(p), rng.random())), len(p) - 1)
        log_prob += math.log(p[pos]) if p[pos] > 0 else -math.inf
        steps.append(Step(cur, cands, p, pos))
        cur = remaining.pop(pos)
        order.append(cur)
    return Tour(order), TourTrace(log_prob, steps, pack, w, policy.feature_schema)


def _as_pack(inst: BTSPInstance | InstancePack) -> InstancePack:
    return inst if isinstance(inst, InstancePack) else featurize(inst)


def sample_tour(
    policy: PolicyParams,
    inst: BTSPInstance | InstancePack,
    w: PreferenceVector,
    rng: np.random.Generator,
) -> tuple[Tour, TourTrace]:
    """Sample one tour; the trace carries log_prob and per-step records."""
    return _decode(policy, _as_pack(inst), w, rng=rng)


def greedy_tour(
    policy: PolicyParams, inst: BTSPInstance | InstancePack, w: PreferenceVector
) -> Tour:
    return _decode(policy, _as_pack(inst), w)[0]


def tour_log_prob(
    policy: PolicyParams,
    inst: BTSPInstance | InstancePack,
    w: PreferenceVector,
    tour: Tour,
) -> float:
    """log p(tour) under the policy (teacher-forced re-scoring)."""
    return _decode(policy, _as_pack(inst), w, forced=tour.order)[1].log_prob


def trace_grad(trace: TourTrace) -> np.ndarray:
    """Gradient of log p(tour) w.r.t. theta: sum over steps of
    (chosen features - probability-weighted mean features)."""
    g = np.zeros(FEATURE_DIM)
    use_prefs = trace.feature_schema == FEATURE_SCHEMA_FULL
    d1n, d2n, nf = trace.pack.d1n, trace.pack.d2n, trace.pack.nf
    w1, w2 = trace.w.w1, trace.w.w2
    for st in trace.steps:
        d1row = d1n[st.current, st.candidates]
        d2row = d2n[st.current, st.candidates]
        dd1 = d1row[st.chosen] - st.probs @ d1row
        dd2 = d2row[st.chosen] - st.probs @ d2row
        dnf = nf[st.candidates[st.chosen]] - st.probs @ nf[st.candidates]
        g[0] += dd1
        g[1] += dd2
        if use_prefs:
            g[2] += w1 * dd1
            g[3] += w2 * dd2
            g[4] += w2 * dd1
            g[5] += w1 * dd2
        g[6:12] += dnf
        # bias feature is constant across candidates: zero contribution
    return g


def log_prob_grad(
    policy: PolicyParams,
    inst: BTSPInstance | InstancePack,
    w: PreferenceVector,
    tour: Tour,
) -> tuple[float, np.ndarray]:
    """(log p(tour), d log p / d theta) for a fixed tour."""
    _, trace = _decode(policy, _as_pack(inst), w, forced=tour.order)
    return trace.log_prob, trace_grad(trace)


def reinforce_gradient(batch: Sequence[tuple[TourTrace, float, float]]) -> np.ndarray:
    """Policy-gradient estimate: mean over the batch of (L - baseline) * grad log p."""
    if not batch:
        raise InvalidInputError("batch must be non-empty")
    g = np.zeros(FEATURE_DIM)
    for trace, reward, baseline in batch:
        g += (reward - baseline) * trace_grad(trace)
    return g / len(batch)


def critic_update(
    critic: CriticParams,
    batch: Sequence[tuple[np.ndarray, float]],
    eta_critic: float,
) -> CriticParams:
    """One gradient-descent step on the mean squared prediction error."""
    if not batch:
        raise InvalidInputError("batch must be non-empty")
    x = np.stack([feats for feats, _ in batch])
    y = np.array([target for _, target in batch])
    residual = x @ critic.phi - y
    grad = (2.0 / len(batch)) * (x.T @ residual)
    return CriticParams(critic.phi - eta_critic * grad)


InstanceSampler = Callable[[np.random.Generator], BTSPInstance]


def euclidean_distribution(n: int) -> InstanceSampler:
    """Sampler of uniform unit-square instances with n cities."""
    from .core import EuclideanInstance

    def sampler(rng: np.random.Generator) -> BTSPInstance:
        return EuclideanInstance(rng.random((n, 2, 2)))

    return sampler


def train(
    instances_dist: InstanceSampler,
    cfg: TrainConfig,
    on_iteration: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[PolicyParams, CriticParams, MultiplierState]:
    """Run the full training loop.

    Per iteration: sample a batch of instances; for every preference and
    instance sample a tour, score it with the Lagrangian reward, and record
    the critic baseline; then one actor step, one critic step, and a
    multiplier ascent step. ``on_iteration`` receives the per-preference
    mean reward after each iteration.
    """
    schema = FEATURE_SCHEMA_FULL if cfg.preference_features else FEATURE_SCHEMA_NO_PREFS
    policy = PolicyParams.zeros(schema)
    critic = CriticParams.zeros()
    prefs = generate_preferences(cfg.K)
    mult = MultiplierState.zeros(cfg.K, cfg.alpha, cfg.lambda_min, cfg.lambda_max)
    rng = np.random.default_rng(cfg.seed)

    for it in range(cfg.iterations):
        packs = [featurize(instances_dist(rng)) for _ in range(cfg.batch_size)]
        actor_batch: list[tuple[TourTrace, float, float]] = []
        critic_batch: list[tuple[np.ndarray, float]] = []
        batch_g: list[list[float]] = []
        mean_rewards = np.zeros(cfg.K)
        for k, w in enumerate(prefs):
            lam = mult.lambdas[k]
            g_list: list[float] = []
            for pack in packs:
                tour, trace = _decode(policy, pack, w, rng=rng)
                F = evaluate(tour, pack.inst)
                g = cone_constraint(F, w)
                reward = lagrangian_reward(F, w, lam)
                baseline = float(critic_features(w, pack) @ critic.phi)
                actor_batch.append((trace, reward, baseline))
                critic_batch.append((critic_features(w, pack), reward))
                g_list.append(g)
                mean_rewards[k] += reward
            batch_g.append(g_list)
            mean_rewards[k] /= cfg.batch_size
        policy = PolicyParams(
            policy.theta - cfg.eta_actor * reinforce_gradient(actor_batch),
            policy.feature_schema,
        )
        critic = critic_update(critic, critic_batch, cfg.eta_critic)
        mult = update_multipliers(mult, batch_g)
        if not (
            np.all(np.isfinite(policy.theta))
            and np.all(np.isfinite(critic.phi))
            and all(math.isfinite(v) for v in mult.lambdas)
        ):
            raise DivergenceError(f"non-finite parameters at iteration {it}")
        if on_iteration is not None:
            on_iteration(it, mean_rewards)
    return policy, critic, mult


def infer_front(
    policy: PolicyParams,
    inst: BTSPInstance,
    prefs: PreferenceSet,
    samples_per_pref: int = 1,
    seed: int = 0,
) -> ParetoArchive:
    """Per preference: one greedy decode plus stochastic samples; archive all."""
    if samples_per_pref < 1:
        raise InvalidInputError("samples_per_pref must be >= 1")
    pack = featurize(inst)
    archive = ParetoArchive()
    for k, w in enumerate(prefs):
        tour = _decode(policy, pack, w)[0]
        archive.insert(tour, evaluate(tour, inst))
        if samples_per_pref > 1:
            rng = np.random.default_rng((int(seed), k))
            for _ in range(samples_per_pref - 1):
                tour, _ = _decode(policy, pack, w, rng=rng)
                archive.insert(tour, evaluate(tour, inst))
    return archive


def save_checkpoint(
    path: str | Path,
    policy: PolicyParams,
    critic: CriticParams,
    multipliers: MultiplierState,
) -> None:
    data = {
        "theta": policy.theta.tolist(),
        "phi": critic.phi.tolist(),
        "lambdas": list(multipliers.lambdas),
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "feature_schema": policy.feature_schema,
    }
    Path(path).write_text(json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n")


def load_checkpoint(path: str | Path) -> tuple[PolicyParams, CriticParams, MultiplierState]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
    version = int(data.get("schema_version", 0))
    if version > CHECKPOINT_SCHEMA_VERSION:
        raise InvalidInputError(
            f"checkpoint schema_version {version} is newer than supported "
            f"{CHECKPOINT_SCHEMA_VERSION}"
        )
    try:
        policy = PolicyParams(np.array(data["theta"]), data["feature_schema"])
        critic = CriticParams(np.array(data["phi"]))
        lambdas = tuple(float(v) for v in data["lambdas"])
        # Bounds are training-time state not stored in the checkpoint; widen
        # so multipliers from a custom-bound run still load.
        upper = max([50.0, *lambdas]) if lambdas else 50.0
        mult = MultiplierState(lambdas, lambda_max=upper)
    except KeyError as exc:
        raise InvalidInputError(f"checkpoint missing key: {exc}") from exc
    return policy, critic, mult
