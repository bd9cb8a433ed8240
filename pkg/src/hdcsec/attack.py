"""Reasoning attacks on the encoder and validation sweeps against the lock.

The attacker sees the unindexed hypervector pools plus an encoding oracle
and recovers the index mapping in two stages:

* value stage: the two pool vectors at mutual distance ~0.5 are the level
  endpoints; one crafted all-minimum query disambiguates which endpoint
  is level 0 (the query factorizes through the order-invariant sum of all
  feature vectors, so no feature knowledge is needed); the remaining
  levels sort by distance from level 0.
* feature stage: for each position, one crafted query raises that feature
  to the top level. The element-wise difference against the all-minimum
  response isolates the sign flips caused by that single feature, and
  each candidate is scored by how well it predicts the flip directions.
  Wrong candidates are uncorrelated with the flips and cluster at
  mismatch 0.5; the right one predicts every flip. Candidates drain from
  the pool as positions resolve, so the total guess count stays under
  N(N+1)/2.

Non-binary oracles skip the sign compression: the guessed accumulator of
the correct candidate equals the observed one integer-for-integer, so its
cosine is exactly 1.0.

The lock-validation sweep replays the same difference trick against a
locked encoder with all but one key parameter fixed to the truth,
scanning the free parameter across its full range.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .encoder import EncoderConfig, encode, encode_binary
from .errors import (
    AmbiguityError,
    BudgetExceededError,
    ConfigError,
    DegenerateVectorError,
)
from .hv import Accumulator, Hypervector, binarize, bundle, hamming, multiply
from .item_memory import ItemMemory
from .keylock import BasePool, LockKey
from .model import TrainedModel, train
from .rng import Rng

DEFAULT_ENDPOINT_GAP = 0.01
DEFAULT_MIN_SEPARATION = 0.1


class EncodeOracle:
    """The attacker-facing encoding boundary of a victim model.

    Returns the victim's encoding output for a crafted quantized sample:
    a Hypervector in binary mode, an Accumulator otherwise. The victim
    device resolves sign(0) with one fixed per-device tie pattern, so
    repeated queries are mutually consistent. A call counter tracks how
    much access each attack stage consumed.
    """

    def __init__(self, cfg: EncoderConfig, rng: Rng | None = None):
        self.cfg = cfg
        self.mode = cfg.mode
        self.rng = rng if rng is not None else Rng(cfg.item_memory.seed, "oracle")
        self.calls = 0

    @classmethod
    def from_model(cls, model: TrainedModel) -> "EncodeOracle":
        return cls(model.encoder, Rng(model.seed, "oracle"))

    def query(self, sample):
        self.calls += 1
        if self.mode == "binary":
            return encode_binary(sample, self.cfg, self.rng)
        return encode(sample, self.cfg)


@dataclass
class AttackerView:
    """Unindexed pools plus the withheld ground truth (scoring only)."""

    fea_pool: list[Hypervector]
    val_pool: list[Hypervector]
    fea_truth: np.ndarray  # fea_truth[position] = pool index of that feature
    val_truth: np.ndarray  # val_truth[level] = pool index of that level
    shuffle_seed: int


def shuffle_pools(item_memory: ItemMemory, shuffle_seed: int) -> AttackerView:
    """Strip the index mapping by shuffling pool order with a disclosed seed."""
    rng = Rng(shuffle_seed, "shuffle")
    perm_f = rng.child("fea").permutation(item_memory.n_features)
    perm_v = rng.child("val").permutation(item_memory.n_levels)
    fea_pool = [item_memory.fea[i] for i in perm_f]
    val_pool = [item_memory.val[i] for i in perm_v]
    fea_truth = np.argsort(perm_f)
    val_truth = np.argsort(perm_v)
    return AttackerView(fea_pool, val_pool, fea_truth, val_truth, shuffle_seed)


@dataclass
class GuessTrace:
    """One parameter sweep: every candidate's score, truth position marked."""

    swept_parameter: str
    candidates: np.ndarray
    scores: np.ndarray
    correct_position: int
    metric: str  # "mismatch" (binary) or "cosine" (non-binary)

    def __post_init__(self):
        if not 0 <= self.correct_position < len(self.candidates):
            raise ValueError("correct_position out of range")

    def correct_is_strict_optimum(self) -> bool:
        s = self.scores
        c = self.correct_position
        others = np.delete(s, c)
        if self.metric == "mismatch":
            return bool(s[c] < others.min())
        return bool(s[c] > others.max())

    def to_dict(self) -> dict:
        return {
            "swept_parameter": self.swept_parameter,
            "metric": self.metric,
            "candidates": np.asarray(self.candidates).tolist(),
            "scores": np.asarray(self.scores, dtype=float).tolist(),
            "correct_position": int(self.correct_position),
        }


@dataclass
class ValueExtraction:
    mapping: np.ndarray  # mapping[level] = pool index
    min_response: object  # oracle output for the all-minimum sample
    endpoint_pair: tuple[int, int]
    estimate_distances: dict


@dataclass
class FeatureExtraction:
    mapping: np.ndarray  # mapping[position] = pool index
    guesses: int
    traces: list = field(default_factory=list)


def _pairwise_diff_counts(pool: list[Hypervector]) -> np.ndarray:
    n = len(pool)
    counts = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            c = int(np.bitwise_count(pool[i].words ^ pool[j].words).sum())
            counts[i, j] = counts[j, i] = c
    return counts


def extract_value_mapping(
    fea_pool: list[Hypervector],
    val_pool: list[Hypervector],
    oracle: EncodeOracle,
    attacker_rng: Rng | None = None,
    endpoint_gap: float = DEFAULT_ENDPOINT_GAP,
) -> ValueExtraction:
    """Recover the level order of the value pool. Costs one oracle call."""
    if attacker_rng is None:
        attacker_rng = Rng(0, "attacker")
    m = len(val_pool)
    n = len(fea_pool)
    dim = val_pool[0].dim
    if m < 2:
        raise ConfigError("value pool must hold at least two vectors")

    counts = _pairwise_diff_counts(val_pool)
    gap = int(round(endpoint_gap * dim))
    dmax = counts.max()
    near = np.argwhere(np.triu(counts, 1) >= dmax - gap)
    if len(near) != 1:
        raise AmbiguityError(
            "multiple candidate endpoint pairs near the maximum distance",
            candidates=[tuple(map(int, pair)) for pair in near],
        )
    a, b = map(int, near[0])

    min_sample = np.zeros(n, dtype=np.int64)
    response = oracle.query(min_sample)

    total = bundle(fea_pool)
    if oracle.mode == "binary":
        estimate = multiply(response, binarize(total, attacker_rng))
        d_a = hamming(estimate, val_pool[a])
        d_b = hamming(estimate, val_pool[b])
        if abs(d_a - d_b) < 0.1:
            raise AmbiguityError(
                f"endpoint estimate is equidistant ({d_a:.3f} vs {d_b:.3f})",
                candidates=[a, b],
            )
        level0, level_last = (a, b) if d_a < d_b else (b, a)
        est_dist = {"level0": min(d_a, d_b), "other": max(d_a, d_b)}
    else:
        scores = []
        tot64 = total.elements.astype(np.int64)
        obs = response.elements.astype(np.int64)
        for c in (a, b):
            guess = val_pool[c].bipolar().astype(np.int64) * tot64
            dot = int(guess @ obs)
            na = int(guess @ guess)
            nb = int(obs @ obs)
            exact = na > 0 and nb > 0 and dot > 0 and dot * dot == na * nb
            scores.append(1.0 if exact else dot / max(np.sqrt(float(na) * nb), 1e-30))
        if abs(scores[0] - scores[1]) < 0.1:
            raise AmbiguityError(
                f"endpoint cosines too close ({scores[0]:.3f} vs {scores[1]:.3f})",
                candidates=[a, b],
            )
        level0, level_last = (a, b) if scores[0] > scores[1] else (b, a)
        est_dist = {"level0": max(scores), "other": min(scores)}

    middle = [j for j in range(m) if j not in (level0, level_last)]
    middle_counts = [(int(counts[level0, j]), j) for j in middle]
    seen = [c for c, _ in middle_counts]
    if len(set(seen)) != len(seen):
        raise AmbiguityError(
            "mid-level distances from level 0 are not strictly ordered",
            candidates=middle,
        )
    middle_sorted = [j for _, j in sorted(middle_counts)]
    mapping = np.array([level0] + middle_sorted + [level_last], dtype=np.int64)
    return ValueExtraction(mapping, response, (level0, level_last), est_dist)


def extract_feature_mapping(
    fea_pool: list[Hypervector],
    val_pool: list[Hypervector],
    value_mapping: np.ndarray,
    oracle: EncodeOracle,
    min_response=None,
    attacker_rng: Rng | None = None,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    budget: int | None = None,
    trace_positions: int = 0,
) -> FeatureExtraction:
    """Recover which pool vector backs each feature position.

    Divide and conquer: position i is decided by one crafted query and an
    argmin over the still-unassigned candidates, after which the winner
    leaves the pool. The final position is forced without a query. Pass
    the value stage's `min_response` to reuse its oracle call; otherwise
    one extra all-minimum query is made.
    """
    if attacker_rng is None:
        attacker_rng = Rng(0, "attacker")
    n = len(fea_pool)
    m = len(val_pool)
    dim = fea_pool[0].dim
    pool_bip = np.stack([hv.bipolar() for hv in fea_pool])
    val0 = val_pool[int(value_mapping[0])].bipolar().astype(np.int16)
    val_top = val_pool[int(value_mapping[m - 1])].bipolar().astype(np.int16)
    vdiff = val_top - val0  # in {-2, 0, 2}

    if min_response is None:
        min_response = oracle.query(np.zeros(n, dtype=np.int64))

    binary = oracle.mode == "binary"
    if binary:
        min_bip = min_response.bipolar().astype(np.int8)
    else:
        base = min_response.elements.astype(np.int64)
        guess_matrix = base[None, :] + pool_bip.astype(np.int64) * vdiff[None, :]
        guess_norms = np.einsum("nd,nd->n", guess_matrix, guess_matrix)

    mapping = np.full(n, -1, dtype=np.int64)
    unassigned = np.ones(n, dtype=bool)
    guesses = 0
    traces: list[dict] = []

    for pos in range(n):
        cand_idx = np.nonzero(unassigned)[0]
        if len(cand_idx) == 1:
            mapping[pos] = cand_idx[0]  # forced, no query needed
            break
        if budget is not None and guesses + len(cand_idx) > budget:
            raise BudgetExceededError(
                f"guess budget {budget} exhausted at position {pos}"
            )
        sample = np.zeros(n, dtype=np.int64)
        sample[pos] = m - 1
        observed = oracle.query(sample)

        if binary:
            delta = observed.bipolar().astype(np.int8) - min_bip
            flips = np.nonzero(delta)[0]
            if len(flips) == 0:
                raise AmbiguityError(
                    f"query for position {pos} produced no output difference"
                )
            direction = np.sign(delta[flips]).astype(np.int16)
            preds = np.sign(
                vdiff[flips][None, :] * pool_bip[cand_idx][:, flips].astype(np.int16)
            )
            scores = np.mean(preds != direction[None, :], axis=1)
            order = np.argsort(scores, kind="stable")
            best_score, runner_up = scores[order[0]], scores[order[1]]
            if runner_up - best_score < min_separation:
                raise AmbiguityError(
                    f"position {pos}: no clear argmin "
                    f"({best_score:.3f} vs {runner_up:.3f})",
                    candidates=[int(cand_idx[order[0]]), int(cand_idx[order[1]])],
                )
        else:
            obs = observed.elements.astype(np.int64)
            dots = guess_matrix[cand_idx] @ obs
            denom = np.sqrt(guess_norms[cand_idx].astype(np.float64) * float(obs @ obs))
            scores = dots / np.maximum(denom, 1e-30)
            exact = np.nonzero(
                np.all(guess_matrix[cand_idx] == obs[None, :], axis=1)
            )[0]
            if len(exact) != 1:
                raise AmbiguityError(
                    f"position {pos}: {len(exact)} candidates reproduce "
                    "the observed accumulator exactly",
                    candidates=[int(cand_idx[e]) for e in exact],
                )
            scores[exact[0]] = 1.0
            order = np.argsort(-scores, kind="stable")

        guesses += len(cand_idx)
        best = int(cand_idx[order[0]])
        mapping[pos] = best
        unassigned[best] = False
        if pos < trace_positions:
            traces.append(
                {
                    "position": pos,
                    "candidates": cand_idx.tolist(),
                    "scores": np.asarray(scores, dtype=float).tolist(),
                    "chosen": best,
                }
            )
    return FeatureExtraction(mapping, guesses, traces)


def extract_nonbinary(
    fea_pool: list[Hypervector],
    val_pool: list[Hypervector],
    oracle: EncodeOracle,
    attacker_rng: Rng | None = None,
    budget: int | None = None,
    trace_positions: int = 0,
) -> tuple[ValueExtraction, FeatureExtraction]:
    """Both extraction stages against a non-binary (accumulator) oracle."""
    if oracle.mode != "non-binary":
        raise ConfigError("extract_nonbinary requires a non-binary oracle")
    value = extract_value_mapping(fea_pool, val_pool, oracle, attacker_rng)
    feature = extract_feature_mapping(
        fea_pool,
        val_pool,
        value.mapping,
        oracle,
        min_response=value.min_response,
        attacker_rng=attacker_rng,
        budget=budget,
        trace_positions=trace_positions,
    )
    return value, feature


def reconstruct_model(
    value_mapping: np.ndarray,
    feature_mapping: np.ndarray,
    fea_pool: list[Hypervector],
    val_pool: list[Hypervector],
    mode: str,
    seed: int,
    class_vectors: list | None = None,
    train_data: tuple[np.ndarray, np.ndarray] | None = None,
    threads: int = 1,
) -> TrainedModel:
    """Assemble a model from recovered mappings.

    Rebind mode reattaches the victim's stolen class vectors to the
    reordered item memory; retrain mode fits fresh class vectors on
    attacker-held data with the recovered encoder.
    """
    n, m = len(feature_mapping), len(value_mapping)
    dim = fea_pool[0].dim
    fea = [fea_pool[int(feature_mapping[i])] for i in range(n)]
    val = [val_pool[int(value_mapping[v])] for v in range(m)]
    im = ItemMemory(n, m, dim, fea, val, seed)
    cfg = EncoderConfig(mode, im)
    if train_data is not None:
        samples, labels = train_data
        return train(samples, labels, cfg, Rng(seed, "train"), threads=threads)
    if class_vectors is None:
        raise ConfigError("rebind reconstruction requires the victim class vectors")
    return TrainedModel(mode, cfg, class_vectors, seed)


@dataclass
class AttackReport:
    scenario: str
    parameters: dict
    value_mapping: list
    feature_mapping: list
    guesses_used: int
    oracle_calls: int
    reconstruction_mode: str
    recovered_accuracy: float | None
    original_accuracy: float | None
    value_mapping_correct: bool | None
    feature_mapping_correct: bool | None
    traces: list = field(default_factory=list)
    elapsed: float = 0.0  # reported via the timing sidecar, not the artifact

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "parameters": self.parameters,
            "value_mapping": [int(v) for v in self.value_mapping],
            "feature_mapping": [int(v) for v in self.feature_mapping],
            "guesses_used": int(self.guesses_used),
            "oracle_calls": int(self.oracle_calls),
            "reconstruction_mode": self.reconstruction_mode,
            "recovered_accuracy": self.recovered_accuracy,
            "original_accuracy": self.original_accuracy,
            "value_mapping_correct": self.value_mapping_correct,
            "feature_mapping_correct": self.feature_mapping_correct,
            "traces": self.traces,
        }


def run_reasoning_attack(
    model: TrainedModel,
    shuffle_seed: int,
    attacker_seed: int = 0,
    reconstruction_mode: str = "rebind",
    train_data: tuple[np.ndarray, np.ndarray] | None = None,
    eval_data: tuple[np.ndarray, np.ndarray] | None = None,
    budget: int | None = None,
    trace_positions: int = 0,
    threads: int = 1,
) -> AttackReport:
    """Full pipeline: shuffle pools, extract mappings, rebuild, evaluate."""
    from .model import evaluate  # local import to avoid cycle at module load

    if model.encoder.locked:
        raise ConfigError(
            "reasoning attack targets unlocked models; use the lock-validation sweep"
        )
    started = time.perf_counter()
    view = shuffle_pools(model.encoder.item_memory, shuffle_seed)
    oracle = EncodeOracle.from_model(model)
    attacker_rng = Rng(attacker_seed, "attacker")

    value = extract_value_mapping(view.fea_pool, view.val_pool, oracle, attacker_rng)
    feature = extract_feature_mapping(
        view.fea_pool,
        view.val_pool,
        value.mapping,
        oracle,
        min_response=value.min_response,
        attacker_rng=attacker_rng,
        budget=budget,
        trace_positions=trace_positions,
    )

    value_ok = bool(np.array_equal(value.mapping, view.val_truth))
    feature_ok = bool(np.array_equal(feature.mapping, view.fea_truth))

    recovered = reconstruct_model(
        value.mapping,
        feature.mapping,
        view.fea_pool,
        view.val_pool,
        model.mode,
        model.seed,
        class_vectors=model.class_vectors if reconstruction_mode == "rebind" else None,
        train_data=train_data if reconstruction_mode == "retrain" else None,
        threads=threads,
    )

    recovered_acc = original_acc = None
    if eval_data is not None:
        samples, labels = eval_data
        recovered_acc = evaluate(samples, labels, recovered, threads=threads)
        original_acc = evaluate(samples, labels, model, threads=threads)

    elapsed = time.perf_counter() - started
    cfg = model.encoder
    return AttackReport(
        scenario=f"baseline-{model.mode}",
        parameters={
            "n_features": cfg.n_features,
            "n_levels": cfg.n_levels,
            "dim": cfg.dim,
            "model_seed": model.seed,
            "shuffle_seed": shuffle_seed,
            "attacker_seed": attacker_seed,
        },
        value_mapping=value.mapping.tolist(),
        feature_mapping=feature.mapping.tolist(),
        guesses_used=feature.guesses,
        oracle_calls=oracle.calls,
        reconstruction_mode=reconstruction_mode,
        recovered_accuracy=recovered_acc,
        original_accuracy=original_acc,
        value_mapping_correct=value_ok,
        feature_mapping_correct=feature_ok,
        traces=feature.traces,
        elapsed=elapsed,
    )


def _rotated_columns(base_row: np.ndarray, indices: np.ndarray, k: int) -> np.ndarray:
    return base_row[(indices + k) % len(base_row)]


def lock_validation_attack(
    oracle: EncodeOracle,
    pool: BasePool,
    val_memory: list[Hypervector],
    true_key: LockKey,
    swept: tuple[str, int],
    feature: int = 0,
) -> GuessTrace:
    """Single-unknown-parameter sweep against a locked encoder.

    The attacker (granted the value mapping) queries two crafted inputs:
    all features at the minimum level, then the target feature raised to
    the top level. The element-wise difference isolates the target
    feature's contribution; candidate guesses of the swept key parameter
    are scored against it, restricted to the nonzero difference indices.
    Binary scoring counts sign mismatches (guessed zeros count as
    mismatches; a correct guess never produces one inside the index set).
    Non-binary scoring uses cosine, exact 1.0 for the correct guess.
    """
    kind, layer = swept
    if kind not in ("rotation", "base"):
        raise ConfigError(f"unknown swept parameter kind {kind!r}")
    if not 0 <= layer < true_key.layers:
        raise ConfigError(f"layer {layer} out of range for L={true_key.layers}")
    n = true_key.n_features
    m = len(val_memory)
    dim = pool.dim

    min_sample = np.zeros(n, dtype=np.int64)
    top_sample = min_sample.copy()
    top_sample[feature] = m - 1
    r_min = oracle.query(min_sample)
    r_top = oracle.query(top_sample)

    val0 = val_memory[0].bipolar().astype(np.int16)
    val_top = val_memory[m - 1].bipolar().astype(np.int16)
    vdiff = val0 - val_top  # matches the min-minus-top difference below

    if oracle.mode == "binary":
        delta = r_min.bipolar().astype(np.int8) - r_top.bipolar().astype(np.int8)
    else:
        delta = r_min.elements.astype(np.int64) - r_top.elements.astype(np.int64)
    idx = np.nonzero(delta)[0]
    if len(idx) == 0:
        raise DegenerateVectorError(
            "the two crafted queries produced identical outputs"
        )

    pool_mat = pool.matrix()
    sub_key = true_key.entries[feature]
    fixed = np.ones(len(idx), dtype=np.int16)
    for l, (b, k) in enumerate(sub_key):
        if l == layer:
            continue
        fixed = fixed * _rotated_columns(pool_mat[b], idx, int(k)).astype(np.int16)

    if kind == "rotation":
        base_row = pool_mat[int(sub_key[layer, 0])]
        ks = np.arange(dim)
        gathered = base_row[(idx[None, :] + ks[:, None]) % dim].astype(np.int16)
        candidates = ks
        correct = int(sub_key[layer, 1])
    else:
        k_true = int(sub_key[layer, 1])
        gathered = pool_mat[:, (idx + k_true) % dim].astype(np.int16)
        candidates = np.arange(pool.p)
        correct = int(sub_key[layer, 0])

    guesses = gathered * fixed[None, :]
    preds = vdiff[idx][None, :] * guesses  # zero where the endpoints agree

    if oracle.mode == "binary":
        target = np.sign(delta[idx]).astype(np.int16)
        scores = np.mean(np.sign(preds) != target[None, :], axis=1)
        metric = "mismatch"
    else:
        target = delta[idx]
        preds64 = preds.astype(np.int64)
        dots = preds64 @ target
        norms = np.einsum("cd,cd->c", preds64, preds64)
        tnorm = int(target @ target)
        denom = np.sqrt(norms.astype(np.float64) * float(tnorm))
        scores = dots / np.maximum(denom, 1e-30)
        exact = (dots > 0) & (dots * dots == norms * tnorm)
        scores[exact] = 1.0
        metric = "cosine"

    name = f"{'k' if kind == 'rotation' else 'base_index'}[layer {layer}]"
    return GuessTrace(name, candidates, scores, correct, metric)


def exhaustive_lock_search(
    oracle: EncodeOracle,
    pool: BasePool,
    val_memory: list[Hypervector],
    layers: int,
    feature: int = 0,
    budget: int = 10_000_000,
) -> tuple[np.ndarray, int, float]:
    """Brute-force the full sub-key of one feature over all (D*P)**L guesses.

    Refuses to start when the search space exceeds the budget cap (the
    space grows fast enough that an accidental full-size run would never
    finish). Returns (best entries, guesses evaluated, best score).
    """
    dim, p = pool.dim, pool.p
    space = (dim * p) ** layers
    if space > budget:
        raise BudgetExceededError(
            f"search space {space} exceeds the budget cap {budget}"
        )
    n = oracle.cfg.n_features
    m = len(val_memory)
    min_sample = np.zeros(n, dtype=np.int64)
    top_sample = min_sample.copy()
    top_sample[feature] = m - 1
    r_min = oracle.query(min_sample)
    r_top = oracle.query(top_sample)
    if oracle.mode == "binary":
        delta = r_min.bipolar().astype(np.int8) - r_top.bipolar().astype(np.int8)
    else:
        delta = r_min.elements.astype(np.int64) - r_top.elements.astype(np.int64)
    idx = np.nonzero(delta)[0]
    if len(idx) == 0:
        raise DegenerateVectorError(
            "the two crafted queries produced identical outputs"
        )
    val0 = val_memory[0].bipolar().astype(np.int16)
    val_top = val_memory[m - 1].bipolar().astype(np.int16)
    vdiff = (val0 - val_top)[idx]
    pool_mat = pool.matrix()
    target_sign = np.sign(delta[idx]).astype(np.int16)
    target = delta[idx]

    best_entries = None
    best_score = None
    guesses = 0

    def score_guess(product: np.ndarray) -> float:
        pred = vdiff * product
        if oracle.mode == "binary":
            return float(np.mean(np.sign(pred) != target_sign))
        pred64 = pred.astype(np.int64)
        dot = int(pred64 @ target)
        norm = int(pred64 @ pred64)
        tnorm = int(target @ target)
        if norm == 0:
            return -1.0
        if dot > 0 and dot * dot == norm * tnorm:
            return 1.0
        return dot / np.sqrt(float(norm) * tnorm)

    def recurse(layer: int, product: np.ndarray, chosen: list):
        nonlocal best_entries, best_score, guesses
        if layer == layers:
            guesses += 1
            s = score_guess(product)
            better = (
                best_score is None
                or (oracle.mode == "binary" and s < best_score)
                or (oracle.mode != "binary" and s > best_score)
            )
            if better:
                best_score = s
                best_entries = np.array(chosen, dtype=np.int64)
            return
        for b in range(p):
            row = pool_mat[b]
            for k in range(dim):
                term = row[(idx + k) % dim].astype(np.int16)
                recurse(layer + 1, product * term, chosen + [[b, k]])

    recurse(0, np.ones(len(idx), dtype=np.int16), [])
    return best_entries, guesses, float(best_score)


def split_pools(vectors: list[Hypervector], threshold: float = 0.45) -> tuple[list[int], list[int]]:
    """Best-effort separation of a mixed dump into feature and value pools.

    Value vectors are linearly correlated, so each has at least one
    partner well below distance 0.5; feature vectors sit near 0.5 from
    everything. Needs at least three levels: with two, the endpoints are
    mutually orthogonal and indistinguishable from features.
    """
    counts = _pairwise_diff_counts(vectors)
    dim = vectors[0].dim
    np.fill_diagonal(counts, dim)
    nearest = counts.min(axis=1) / dim
    value_idx = [i for i, d in enumerate(nearest) if d < threshold]
    feature_idx = [i for i, d in enumerate(nearest) if d >= threshold]
    if len(value_idx) < 2:
        raise AmbiguityError(
            "pools are not statistically separable (need >= 3 correlated levels)",
            candidates=value_idx,
        )
    return feature_idx, value_idx
