"""
Tests for decoding: fixture tables, beam search against brute force, fusion.
"""

import itertools
import math

import numpy as np
import pytest

from src.bleu import corpus_bleu
from src.decoding import (
    DEFAULT_FUSION_WEIGHT,
    LOG_FLOOR,
    DecodeConfig,
    FusionConfig,
    FusionMode,
    LanguageModelScorer,
    PostNormNormalization,
    SearchStrategy,
    TableScorer,
    TransformerScorer,
    Translator,
    beam_search,
    fuse_step_scores,
    greedy_decode,
    length_penalty,
    sweep_fusion_weights,
    translate_corpus,
)
from src.errors import ConfigError, DataError, FingerprintError, FusionError, UsageError
from src.model import ModelKind, init_params
from src.tensor import Tensor
from src.tokenizer import BOS_ID, EOS_ID, PAD_ID
from tests.conftest import small_model

SOURCE = [EOS_ID]


def example_table() -> TableScorer:
    return TableScorer.from_mapping({
        "tokens": "eos a b",
        "start": "0.1 0.6 0.3",
        "start.a": "0.2 0.1 0.7",
        "start.a.b": "0.9 0.05 0.05",
    })


def garden_path_table() -> TableScorer:
    """The likeliest first token leads nowhere good."""
    return TableScorer.from_mapping({
        "tokens": "eos a b",
        "start": "0.1 0.5 0.4",
        "start.a": "0.30 0.36 0.34",
        "start.b": "0.9 0.05 0.05",
    })


def random_table(seed: int, symbols=("eos", "a", "b", "c"), depth: int = 4) -> TableScorer:
    rng = np.random.default_rng(seed)
    words = [s for s in symbols if s != "eos"]
    rows = {}
    for n in range(depth):
        for context in itertools.product(words, repeat=n):
            rows[context] = rng.dirichlet(np.ones(len(symbols)))
    return TableScorer(symbols, rows)


def brute_force(table: TableScorer, max_len: int, alpha: float):
    """Best finished sequence over every path of at most ``max_len`` tokens."""
    best = None

    def walk(prefix, log_score):
        nonlocal best
        probs = table.probabilities(prefix)
        for token in np.flatnonzero(probs):
            ids = prefix + [int(token)]
            total = log_score + math.log(probs[token])
            if token == EOS_ID:
                score = total / length_penalty(len(ids) - 1, alpha)
                if best is None or score > best[0]:
                    best = (score, ids, total)
            elif len(ids) - 1 < max_len:
                walk(ids, total)

    walk([BOS_ID], 0.0)
    return best


class TestTableScorer:
    def test_example_table(self):
        hyp = beam_search(example_table(), SOURCE, beam_size=50, max_len=3, alpha=0.0)
        assert example_table().symbol_names(hyp.ids[1:]) == ["a", "b", "eos"]
        assert hyp.finished
        assert hyp.log_score == pytest.approx(math.log(0.378), abs=1e-9)
        assert hyp.log_score == pytest.approx(-0.973, abs=1e-3)

    def test_unlisted_context_ends_sentence(self):
        table = example_table()
        probs = table.probabilities([BOS_ID] + table.encode(["b"]))
        assert probs[EOS_ID] == 1.0

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "table.env"
        path.write_text("tokens=eos a b\nstart=0.1 0.6 0.3\nstart.a=0.2 0.1 0.7\n")
        table = TableScorer.load(path)
        np.testing.assert_allclose(table.probabilities([BOS_ID])[table.encode(["eos", "a", "b"])], [0.1, 0.6, 0.3])

    def test_row_width_must_match_tokens(self):
        with pytest.raises(DataError):
            TableScorer.from_mapping({"tokens": "eos a", "start": "0.5 0.25 0.25"})

    def test_eos_required(self):
        with pytest.raises(DataError):
            TableScorer.from_mapping({"tokens": "a b", "start": "0.5 0.5"})


class TestBeamSearch:
    @pytest.mark.parametrize("seed", range(8))
    @pytest.mark.parametrize("alpha", [0.0, 0.6])
    def test_exhaustive_beam_matches_brute_force(self, seed, alpha):
        table = random_table(seed)
        max_len = 4
        score, ids, total = brute_force(table, max_len, alpha)
        hyp = beam_search(table, SOURCE, beam_size=500, max_len=max_len, alpha=alpha)
        assert hyp.ids == ids
        assert hyp.log_score == pytest.approx(total, abs=1e-9)
        assert hyp.score(alpha) == pytest.approx(score, abs=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_beam_of_one_is_greedy(self, seed):
        table = random_table(seed)
        greedy = greedy_decode(table, SOURCE, max_len=4)
        beam = beam_search(table, SOURCE, beam_size=1, max_len=4, alpha=0.0)
        assert beam.ids == greedy.ids
        assert beam.log_score == pytest.approx(greedy.log_score, abs=1e-12)

    @pytest.mark.parametrize("table", [example_table(), garden_path_table()], ids=["example", "garden-path"])
    def test_wider_beam_never_scores_worse(self, table):
        scores = [beam_search(table, SOURCE, beam_size=b, max_len=3, alpha=0.0).log_score for b in range(1, 5)]
        assert scores == sorted(scores)

    def test_wider_beam_escapes_greedy_prefix(self):
        """Greedy commits to "a" (0.18 at best); a second slot finds "b eos" at 0.36."""
        table = garden_path_table()
        narrow = beam_search(table, SOURCE, beam_size=1, max_len=3, alpha=0.0)
        wide = beam_search(table, SOURCE, beam_size=2, max_len=3, alpha=0.0)
        assert table.symbol_names(narrow.ids[1:]) == ["a", "a", "eos"]
        assert narrow.log_score == pytest.approx(math.log(0.5 * 0.36), abs=1e-9)
        assert table.symbol_names(wide.ids[1:]) == ["b", "eos"]
        assert wide.log_score == pytest.approx(math.log(0.4 * 0.9), abs=1e-9)

    def test_zero_probability_tokens_are_never_expanded(self):
        hyp = beam_search(example_table(), SOURCE, beam_size=500, max_len=3)
        assert not {PAD_ID, BOS_ID} & set(hyp.ids[1:])

    def test_unfinished_when_max_len_is_short(self):
        table = TableScorer.from_mapping({"tokens": "eos a", "default": "0.0 1.0"})
        hyp = beam_search(table, SOURCE, beam_size=2, max_len=3)
        assert not hyp.finished
        assert hyp.length == 3

    def test_length_penalty(self):
        assert length_penalty(1, 0.6) == 1.0
        assert length_penalty(7, 1.0) == pytest.approx(2.0)
        assert length_penalty(10, 0.0) == 1.0

    def test_bad_beam_size(self):
        with pytest.raises(ConfigError):
            beam_search(example_table(), SOURCE, beam_size=0, max_len=3)
        with pytest.raises(ConfigError):
            DecodeConfig(beam_size=0)


class TestFusion:
    def test_zero_weight_shallow_is_bitwise_none(self):
        tm, lm = random_table(1), random_table(2)
        for seed in range(8):
            logits = Tensor(np.random.default_rng(seed).normal(size=(3, 6)), dtype=np.float64)
            lm_logits = Tensor(np.random.default_rng(seed + 100).normal(size=(3, 6)), dtype=np.float64)
            none = fuse_step_scores(logits, None, FusionConfig())
            shallow = fuse_step_scores(logits, lm_logits, FusionConfig(FusionMode.SHALLOW, weight=0.0))
            np.testing.assert_array_equal(none.values, shallow.values)
        plain = beam_search(tm, SOURCE, 4, 4)
        fused = beam_search(tm, SOURCE, 4, 4, fusion=FusionConfig(FusionMode.SHALLOW, weight=0.0), lm=lm)
        assert plain.ids == fused.ids
        assert plain.log_score == fused.log_score

    def test_shallow_adds_weighted_lm(self):
        tm = np.log(np.array([0.7, 0.3]))
        lm = np.log(np.array([0.2, 0.8]))
        fused = fuse_step_scores(Tensor(tm), Tensor(lm), FusionConfig(FusionMode.SHALLOW, weight=0.5))
        np.testing.assert_allclose(fused.values, tm + 0.5 * lm, atol=1e-6)

    def test_postnorm_examples(self):
        tm = Tensor(np.log([0.7, 0.3]), dtype=np.float64)
        lm = Tensor(np.log([0.5, 0.5]), dtype=np.float64)
        by_sum = fuse_step_scores(tm, lm, FusionConfig(FusionMode.POSTNORM, postnorm_norm=PostNormNormalization.SUM))
        np.testing.assert_allclose(np.exp(by_sum.values), [0.7, 0.3], atol=1e-9)
        by_softmax = fuse_step_scores(tm, lm, FusionConfig(FusionMode.POSTNORM))
        np.testing.assert_allclose(np.exp(by_softmax.values), [0.550, 0.450], atol=5e-4)

    def test_uniform_lm_with_sum_normalization_is_neutral(self):
        rng = np.random.default_rng(0)
        config = FusionConfig(FusionMode.POSTNORM, postnorm_norm="sum")
        probs = rng.dirichlet(np.ones(7), size=1000)
        uniform = np.zeros_like(probs)
        fused = fuse_step_scores(Tensor(np.log(probs), dtype=np.float64), Tensor(uniform, dtype=np.float64), config)
        assert np.max(np.abs(np.exp(fused.values) - probs)) < 1e-9

    def test_scores_are_floored(self):
        logits = Tensor(np.array([0.0, -1e12]), dtype=np.float64)
        assert fuse_step_scores(logits, None, FusionConfig()).values.min() >= LOG_FLOOR

    def test_missing_or_unexpected_lm(self):
        logits = Tensor(np.zeros(3))
        with pytest.raises(UsageError):
            fuse_step_scores(logits, None, FusionConfig(FusionMode.SHALLOW))
        with pytest.raises(UsageError):
            fuse_step_scores(logits, logits, FusionConfig())

    def test_lm_vocabulary_must_match(self):
        other = TableScorer(["eos", "a", "c"], {(): [0.2, 0.4, 0.4]})
        with pytest.raises(FusionError):
            beam_search(example_table(), SOURCE, 2, 3, fusion=FusionConfig(FusionMode.SHALLOW), lm=other)

    def test_config_defaults_and_validation(self):
        assert FusionConfig().weight == DEFAULT_FUSION_WEIGHT == 0.003
        with pytest.raises(ConfigError):
            FusionConfig(mode="deep")
        with pytest.raises(ConfigError):
            FusionConfig(FusionMode.SHALLOW, weight=-1.0)


class TestTranslator:
    @pytest.fixture
    def scorer(self, vocab, model_config):
        return TransformerScorer(init_params(model_config, seed=4), model_config, vocab.fingerprint())

    @pytest.fixture
    def lm(self, vocab):
        config = small_model(vocab, kind=ModelKind.LANGUAGE_MODEL)
        return LanguageModelScorer(init_params(config, seed=5), config, vocab.fingerprint())

    def test_translate_returns_text(self, vocab, scorer):
        translator = Translator(vocab, scorer, DecodeConfig(beam_size=3, max_len=8))
        assert isinstance(translator.translate("ab ba"), str)
        hyp = translator.decode_ids(vocab.encode("ab ba") + [EOS_ID])
        assert not {PAD_ID, BOS_ID} & set(hyp.ids[1:])
        assert hyp.length <= 8

    def test_fingerprint_mismatch(self, vocab, model_config):
        scorer = TransformerScorer(init_params(model_config, seed=4), model_config, vocab.fingerprint() ^ 1)
        with pytest.raises(FingerprintError):
            Translator(vocab, scorer)
        Translator(vocab, scorer, force=True)

    def test_fusion_needs_lm(self, vocab, scorer):
        config = DecodeConfig(fusion=FusionConfig(FusionMode.SHALLOW))
        with pytest.raises(UsageError):
            Translator(vocab, scorer, config)

    def test_parallel_corpus_translation_keeps_order(self, vocab, scorer, corpus):
        translator = Translator(vocab, scorer, DecodeConfig(strategy=SearchStrategy.GREEDY, max_len=8))
        sources = corpus.sources[:6]
        serial = translate_corpus(translator, sources, workers=1)
        parallel = translate_corpus(translator, sources, workers=3)
        assert serial.translations == parallel.translations
        assert len(serial) == 6

    def test_failures_yield_empty_lines(self, vocab, scorer):
        translator = Translator(vocab, scorer, DecodeConfig(strategy=SearchStrategy.GREEDY, max_len=4))
        too_long = " ".join(["cab"] * 40)
        result = translate_corpus(translator, ["ab", too_long])
        assert result.translations[1] == ""
        assert list(result.failures) == [1]
        assert "LengthError" in result.failures[1]

    def test_fusion_sweep(self, vocab, scorer, lm, corpus):
        config = DecodeConfig(strategy=SearchStrategy.GREEDY, max_len=6)
        translator = Translator(vocab, scorer, config, lm=lm)
        sources, refs = corpus.sources[:5], corpus.targets[:5]
        results = sweep_fusion_weights(translator, sources, refs, [0.0, 0.003, 0.5])
        assert [w for w, _ in results] == [0.0, 0.003, 0.5]
        plain = corpus_bleu(translate_corpus(translator, sources).translations, refs)
        assert results[0][1].score == plain.score
