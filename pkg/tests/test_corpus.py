"""Corpus operations: determinism, side isolation, structural invariants."""

import pytest

import datascale as ds
from datascale.corpus import (
    REPLACEMENT_ALPHABET,
    SplitMix64,
    format_pair,
    parse_pair_line,
)

WORDS = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"]


def make_corpus(n, seed=123, words_per_side=6, with_scores=False):
    pairs = []
    for i in range(n):
        rng = SplitMix64.for_item(seed, i)
        src = " ".join(WORDS[rng.next_below(len(WORDS))] for _ in range(words_per_side))
        tgt = f"t{i} " + " ".join(WORDS[rng.next_below(len(WORDS))] for _ in range(words_per_side - 1))
        score = rng.next_float() if with_scores else None
        pairs.append(ds.SentencePair(source=src, target=tgt, score=score, index=i))
    return pairs


class TestSplitMix64:
    def test_stream_is_reproducible(self):
        a = SplitMix64.for_item(7, 3)
        b = SplitMix64.for_item(7, 3)
        assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]

    def test_streams_differ_across_items(self):
        a = SplitMix64.for_item(7, 3).next_u64()
        b = SplitMix64.for_item(7, 4).next_u64()
        c = SplitMix64.for_item(8, 3).next_u64()
        assert len({a, b, c}) == 3

    def test_floats_in_unit_interval(self):
        rng = SplitMix64.for_item(1, 1)
        values = [rng.next_float() for _ in range(1000)]
        assert all(0.0 <= v < 1.0 for v in values)


class TestCorruptChars:
    def test_zero_probability_is_identity(self):
        pairs = make_corpus(50)
        spec = ds.CorruptionSpec(kind="char_noise", side="source", prob=0.0, seed=1)
        assert list(ds.corrupt_chars(pairs, spec)) == pairs

    def test_full_probability_replaces_everything_deterministically(self):
        pairs = make_corpus(30)
        spec = ds.CorruptionSpec(kind="char_noise", side="target", prob=1.0, seed=2)
        once = list(ds.corrupt_chars(pairs, spec))
        twice = list(ds.corrupt_chars(pairs, spec))
        assert once == twice
        for out in once:
            assert all(ch in REPLACEMENT_ALPHABET for ch in out.target)

    def test_preserves_char_counts_and_other_side(self):
        pairs = make_corpus(100)
        spec = ds.CorruptionSpec(kind="char_noise", side="source", prob=0.3, seed=3)
        for before, after in zip(pairs, ds.corrupt_chars(pairs, spec)):
            assert len(after.source) == len(before.source)
            assert after.target == before.target
            assert after.index == before.index

    def test_output_independent_of_processing_order(self):
        pairs = make_corpus(40)
        spec = ds.CorruptionSpec(kind="char_noise", side="source", prob=0.5, seed=9)
        forward = {p.index: p for p in ds.corrupt_chars(pairs, spec)}
        backward = {p.index: p for p in ds.corrupt_chars(reversed(pairs), spec)}
        assert forward == backward

    def test_empty_sentence_passes_through(self):
        pairs = [ds.SentencePair(source="", target="x", index=0)]
        spec = ds.CorruptionSpec(kind="char_noise", side="source", prob=1.0, seed=4)
        assert list(ds.corrupt_chars(pairs, spec))[0].source == ""

    def test_kind_mismatch_rejected(self):
        spec = ds.CorruptionSpec(kind="word_delete", side="source", prob=0.1, seed=0)
        with pytest.raises(ds.DomainError):
            list(ds.corrupt_chars(make_corpus(1), spec))


class TestDeleteWords:
    def test_zero_probability_keeps_words_normalizing_whitespace(self):
        pairs = [ds.SentencePair(source="a  b\tc", target="x", index=0)]
        spec = ds.CorruptionSpec(kind="word_delete", side="source", prob=0.0, seed=1)
        out = list(ds.delete_words(pairs, spec))[0]
        assert out.source == "a b c"

    def test_full_probability_empties_the_side(self):
        pairs = make_corpus(20)
        spec = ds.CorruptionSpec(kind="word_delete", side="target", prob=1.0, seed=2)
        assert all(p.target == "" for p in ds.delete_words(pairs, spec))

    def test_survivors_are_a_subsequence(self):
        pairs = make_corpus(200)
        spec = ds.CorruptionSpec(kind="word_delete", side="source", prob=0.4, seed=3)
        for before, after in zip(pairs, ds.delete_words(pairs, spec)):
            words = iter(before.source.split())
            for survivor in after.source.split():
                for word in words:
                    if word == survivor:
                        break
                else:
                    pytest.fail(f"{survivor!r} is not in order in {before.source!r}")
            assert after.target == before.target


class TestShufflePairs:
    def test_zero_probability_is_identity(self):
        pairs = make_corpus(50)
        spec = ds.CorruptionSpec(kind="pair_shuffle", side="source", prob=0.0, seed=1)
        assert ds.shuffle_pairs(pairs, spec) == pairs

    def test_single_selected_pair_is_left_alone(self):
        # a one-element rotation is the identity, so prob=1 on a singleton
        # corpus must change nothing
        pairs = make_corpus(1)
        spec = ds.CorruptionSpec(kind="pair_shuffle", side="source", prob=1.0, seed=2)
        assert ds.shuffle_pairs(pairs, spec) == pairs

    def test_selected_pairs_swap_targets_preserving_multiset(self):
        pairs = make_corpus(500)
        spec = ds.CorruptionSpec(kind="pair_shuffle", side="source", prob=0.2, seed=3)
        out = ds.shuffle_pairs(pairs, spec)
        assert sorted(p.target for p in out) == sorted(p.target for p in pairs)
        assert [p.source for p in out] == [p.source for p in pairs]
        moved = [i for i, (a, b) in enumerate(zip(pairs, out)) if a.target != b.target]
        assert len(moved) >= 2
        # every moved pair received some *other* pair's target
        originals = {p.target for p in pairs}
        for i in moved:
            assert out[i].target in originals

    def test_full_probability_rotates_all_targets(self):
        pairs = make_corpus(10)
        spec = ds.CorruptionSpec(kind="pair_shuffle", side="source", prob=1.0, seed=4)
        out = ds.shuffle_pairs(pairs, spec)
        assert all(a.target != b.target for a, b in zip(pairs, out))


class TestFilterTopFraction:
    def test_full_fraction_keeps_everything_in_order(self):
        pairs = make_corpus(20, with_scores=True)
        assert ds.filter_top_fraction(pairs, 1.0) == pairs

    def test_tie_at_cutoff_prefers_lower_index(self):
        pairs = [
            ds.SentencePair("s0", "t0", score=0.9, index=0),
            ds.SentencePair("s1", "t1", score=0.1, index=1),
            ds.SentencePair("s2", "t2", score=0.5, index=2),
            ds.SentencePair("s3", "t3", score=0.5, index=3),
        ]
        kept = ds.filter_top_fraction(pairs, 0.5)
        assert [p.index for p in kept] == [0, 2]

    def test_agrees_with_sort_based_oracle(self):
        pairs = make_corpus(5000, with_scores=True)
        kept = ds.filter_top_fraction(pairs, 0.5)
        kept_idx = {p.index for p in kept}
        excluded = [p for p in pairs if p.index not in kept_idx]
        min_kept = min(p.score for p in kept)
        max_excluded = max(p.score for p in excluded)
        if min_kept == max_excluded:
            boundary_kept = min(p.index for p in kept if p.score == min_kept)
            boundary_out = min(p.index for p in excluded if p.score == max_excluded)
            assert boundary_kept < boundary_out
        else:
            assert min_kept > max_excluded
        assert [p.index for p in kept] == sorted(kept_idx)

    def test_missing_score_rejected(self):
        pairs = make_corpus(3, with_scores=True) + [ds.SentencePair("s", "t", index=3)]
        with pytest.raises(ds.SchemaError):
            ds.filter_top_fraction(pairs, 0.5)

    def test_zero_fraction_rejected(self):
        with pytest.raises(ds.DomainError):
            ds.filter_top_fraction(make_corpus(3, with_scores=True), 0.0)


class TestSampleSubset:
    def test_full_size_returns_whole_corpus(self):
        pairs = make_corpus(100)
        assert ds.sample_subset(iter(pairs), 100, seed=1) == pairs

    def test_deterministic_and_chunking_independent(self):
        pairs = make_corpus(1000)

        def chunked():
            for i in range(0, len(pairs), 37):
                yield from pairs[i : i + 37]

        a = ds.sample_subset(iter(pairs), 80, seed=5)
        b = ds.sample_subset(chunked(), 80, seed=5)
        assert a == b
        assert [p.index for p in a] == sorted(p.index for p in a)

    def test_oversized_request_rejected(self):
        with pytest.raises(ds.DomainError):
            ds.sample_subset(iter(make_corpus(5)), 6, seed=0)

    def test_two_pair_corpus_is_sampled_evenly(self):
        pairs = make_corpus(2)
        firsts = sum(
            1 for seed in range(10_000) if ds.sample_subset(iter(pairs), 1, seed=seed)[0].index == 0
        )
        # binomial(10000, 0.5): 5 sigma is 250, window widened to 350
        assert abs(firsts - 5000) <= 350


class TestPairFiles:
    def test_round_trip(self, tmp_path):
        pairs = make_corpus(50, with_scores=True)
        path = tmp_path / "corpus.tsv"
        ds.write_pairs(path, pairs)
        assert list(ds.read_pairs(path)) == pairs

    def test_scoreless_round_trip(self, tmp_path):
        pairs = make_corpus(10)
        path = tmp_path / "corpus.tsv"
        ds.write_pairs(path, pairs)
        assert list(ds.read_pairs(path)) == pairs

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "corpus.tsv"
        path.write_text("a\tb\nno tabs here\n", encoding="utf-8")
        with pytest.raises(ds.ParseError, match="line 2"):
            list(ds.read_pairs(path))

    def test_bad_score_reports_line_number(self, tmp_path):
        path = tmp_path / "corpus.tsv"
        path.write_text("a\tb\t0.5\na\tb\tnot-a-number\n", encoding="utf-8")
        with pytest.raises(ds.ParseError, match="line 2"):
            list(ds.read_pairs(path))

    def test_format_parse_inverse(self):
        pair = ds.SentencePair("source text", "target text", score=0.125, index=4)
        assert parse_pair_line(format_pair(pair), 5, 4) == pair
