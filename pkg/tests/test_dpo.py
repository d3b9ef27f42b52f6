import math

import numpy as np
import pytest
import torch

from moldpo.dpo import (
    DpoConfig,
    PreferencePair,
    ReferenceScorer,
    dpo_loss,
    dpo_loss_and_grad,
    dpo_step,
    log_ratio,
    preference_loss,
)
from moldpo.errors import EmptyPairs, InvalidConfig
from moldpo.model import (
    ModelConfig,
    build_vocab,
    clone_params,
    init_optimizer,
    init_params,
    sample,
    sequence_log_prob,
)

VOCAB = build_vocab(["CCO", "c1ccccc1", "CC(=O)O", "CCCC"])
LN2 = math.log(2.0)


def tiny_config(seed: int = 0) -> ModelConfig:
    return ModelConfig(
        vocab_size=len(VOCAB), context_length=24, layers=2, heads=2, embed_dim=16,
        seed=seed,
    )


def make_pairs(params, cfg, n_pairs: int, seed: int = 0):
    seqs = sample(params, cfg, 2 * n_pairs, max_len=12, seed=seed)
    pairs = []
    for i in range(n_pairs):
        a, b = seqs[2 * i], seqs[2 * i + 1]
        if a.ids == b.ids:
            continue
        pairs.append(PreferencePair(a, b, winner_score=1.0, loser_score=0.0))
    return pairs


class TestPreferencePair:
    def test_gap(self):
        pairs = make_pairs(init_params(tiny_config()), tiny_config(), 1)
        assert pairs[0].gap == 1.0

    def test_ordering_enforced(self):
        cfg = tiny_config()
        seqs = sample(init_params(cfg), cfg, 2, max_len=12, seed=1)
        with pytest.raises(ValueError):
            PreferencePair(seqs[0], seqs[1], winner_score=0.2, loser_score=0.8)


class TestDpoConfig:
    def test_defaults(self):
        config = DpoConfig()
        assert config.beta == 0.1
        assert config.batch_pairs == 50
        assert config.lr == 1e-4

    def test_positive_beta_required(self):
        with pytest.raises(InvalidConfig):
            DpoConfig(beta=0.0)
        with pytest.raises(InvalidConfig):
            DpoConfig(beta=-0.5)


class TestLogRatio:
    def test_zero_for_identical_models(self):
        cfg = tiny_config()
        params = init_params(cfg)
        twin = clone_params(params)
        for seq in sample(params, cfg, 4, max_len=10, seed=2):
            assert log_ratio(params, twin, cfg, seq) == 0.0

    def test_antisymmetric(self):
        cfg = tiny_config()
        a = init_params(tiny_config(seed=1))
        b = init_params(tiny_config(seed=2))
        seq = sample(a, cfg, 1, max_len=10, seed=3)[0]
        assert log_ratio(a, b, cfg, seq) == -log_ratio(b, a, cfg, seq)

    def test_matches_two_pass_computation(self):
        cfg = tiny_config()
        a = init_params(tiny_config(seed=1))
        b = init_params(tiny_config(seed=2))
        seq = sample(a, cfg, 1, max_len=10, seed=4)[0]
        expected = sequence_log_prob(a, cfg, seq) - sequence_log_prob(b, cfg, seq)
        assert log_ratio(a, b, cfg, seq) == pytest.approx(expected, abs=1e-6)


class TestDpoLoss:
    def test_identical_models_give_ln2(self):
        cfg = tiny_config()
        params = init_params(cfg)
        reference = ReferenceScorer(clone_params(params), cfg)
        pairs = make_pairs(params, cfg, 10)
        loss = dpo_loss(params, reference, cfg, pairs, beta=0.1)
        assert abs(loss - LN2) <= 1e-6

    def test_beta_to_zero_limit_is_ln2(self):
        cfg = tiny_config()
        policy = init_params(tiny_config(seed=5))
        reference = ReferenceScorer(init_params(tiny_config(seed=6)), cfg)
        pairs = make_pairs(policy, cfg, 10, seed=5)
        loss = dpo_loss(policy, reference, cfg, pairs, beta=1e-9)
        assert abs(loss - LN2) <= 1e-6

    def test_scalar_probe(self):
        # -ln(sigmoid(1)) with beta=1 and ratio difference 1.
        assert preference_loss(1.0, 1.0) == pytest.approx(0.313262, abs=1e-6)

    def test_loss_positive(self):
        cfg = tiny_config()
        policy = init_params(tiny_config(seed=7))
        reference = ReferenceScorer(init_params(tiny_config(seed=8)), cfg)
        pairs = make_pairs(policy, cfg, 8, seed=7)
        assert dpo_loss(policy, reference, cfg, pairs, beta=0.5) > 0.0

    def test_empty_pairs_rejected(self):
        cfg = tiny_config()
        params = init_params(cfg)
        reference = ReferenceScorer(params, cfg)
        with pytest.raises(EmptyPairs):
            dpo_loss(params, reference, cfg, [], beta=0.1)
        with pytest.raises(EmptyPairs):
            dpo_loss_and_grad(params, reference, cfg, [], beta=0.1)

    def test_deterministic(self):
        cfg = tiny_config()
        policy = init_params(tiny_config(seed=9))
        reference = ReferenceScorer(init_params(tiny_config(seed=10)), cfg)
        pairs = make_pairs(policy, cfg, 6, seed=9)
        a = dpo_loss_and_grad(policy, reference, cfg, pairs, beta=0.1)
        b = dpo_loss_and_grad(policy, reference, cfg, pairs, beta=0.1)
        assert a.loss == b.loss
        assert all(torch.equal(a.gradients[k], b.gradients[k]) for k in a.gradients)

    def test_gradients_cover_policy(self):
        cfg = tiny_config()
        policy = init_params(cfg)
        reference = ReferenceScorer(init_params(tiny_config(seed=11)), cfg)
        pairs = make_pairs(policy, cfg, 6, seed=11)
        result = dpo_loss_and_grad(policy, reference, cfg, pairs, beta=0.1)
        assert set(result.gradients) == set(policy)


class TestDpoStep:
    def test_descends_in_most_trials(self):
        decreases = 0
        trials = 20
        for trial in range(trials):
            cfg = tiny_config(seed=trial)
            policy = init_params(cfg)
            reference = ReferenceScorer(clone_params(policy), cfg)
            pairs = make_pairs(policy, cfg, 10, seed=trial)
            opt = init_optimizer(policy, lr=1e-3)
            new_policy, _, result = dpo_step(
                policy, opt, reference, cfg, pairs, DpoConfig(beta=0.1, lr=1e-3)
            )
            after = dpo_loss(new_policy, reference, cfg, pairs, beta=0.1)
            if after < result.loss:
                decreases += 1
        assert decreases >= int(0.95 * trials)

    def test_margin_grows_over_steps(self):
        cfg = tiny_config(seed=3)
        policy = init_params(cfg)
        reference = ReferenceScorer(clone_params(policy), cfg)
        pairs = make_pairs(policy, cfg, 8, seed=3)
        opt = init_optimizer(policy, lr=1e-3)
        dpo_config = DpoConfig(beta=0.1, lr=1e-3)
        margins = []
        for _ in range(100):
            policy, opt, result = dpo_step(
                policy, opt, reference, cfg, pairs, dpo_config
            )
            margins.append(result.mean_margin)
        assert margins[-1] > margins[0]
        assert np.mean(margins[-25:]) > np.mean(margins[:25])

    def test_reference_untouched_by_training(self):
        cfg = tiny_config(seed=4)
        policy = init_params(cfg)
        ref_params = clone_params(policy)
        before = clone_params(ref_params)
        reference = ReferenceScorer(ref_params, cfg)
        pairs = make_pairs(policy, cfg, 6, seed=4)
        opt = init_optimizer(policy, lr=1e-3)
        for _ in range(5):
            policy, opt, _ = dpo_step(
                policy, opt, reference, cfg, pairs, DpoConfig(lr=1e-3)
            )
        assert all(torch.equal(ref_params[k], before[k]) for k in before)

    def test_policy_moves(self):
        cfg = tiny_config(seed=5)
        policy = init_params(cfg)
        reference = ReferenceScorer(clone_params(policy), cfg)
        pairs = make_pairs(policy, cfg, 6, seed=5)
        opt = init_optimizer(policy, lr=1e-3)
        new_policy, new_opt, _ = dpo_step(
            policy, opt, reference, cfg, pairs, DpoConfig(lr=1e-3)
        )
        assert new_opt.step == 1
        assert not torch.equal(policy["head.w"], new_policy["head.w"])


# Same two-term tolerance as the likelihood gradient check.
FD_RTOL = 1e-4
FD_ATOL = 1e-8


def test_dpo_gradients_match_finite_differences():
    for seed in (0, 1):
        cfg = tiny_config(seed=seed)
        policy = init_params(cfg, dtype=torch.float64)
        reference = ReferenceScorer(
            init_params(tiny_config(seed=seed + 50), dtype=torch.float64), cfg
        )
        pairs = make_pairs(policy, cfg, 4, seed=seed)
        result = dpo_loss_and_grad(policy, reference, cfg, pairs, beta=0.2)
        rng = np.random.default_rng(seed)
        eps = 1e-6
        worst = 0.0
        for name, tensor in policy.items():
            flat = tensor.view(-1)
            picks = rng.choice(flat.numel(), size=min(3, flat.numel()), replace=False)
            for i in picks:
                original = float(flat[i])
                flat[i] = original + eps
                up = dpo_loss(policy, reference, cfg, pairs, beta=0.2)
                flat[i] = original - eps
                down = dpo_loss(policy, reference, cfg, pairs, beta=0.2)
                flat[i] = original
                numeric = (up - down) / (2.0 * eps)
                analytic = float(result.gradients[name].view(-1)[i])
                allowed = FD_ATOL + FD_RTOL * max(abs(analytic), abs(numeric))
                worst = max(worst, abs(analytic - numeric) / allowed)
        assert worst <= 1.0, f"seed {seed}: scaled error {worst}"
