import math

import numpy as np
import pytest

import dsu


def test_bitrate():
    rep = dsu.DiscreteRepresentation([dsu.UnitStream([0] * 100, 2048)], 2.0)
    assert dsu.bitrate(rep) == pytest.approx(550.0, abs=1e-9)
    two = dsu.DiscreteRepresentation([dsu.UnitStream([0] * 50, 4), dsu.UnitStream([0] * 25, 16)], 1.0)
    assert dsu.corpus_bitrate([rep, two]) == pytest.approx((1100 + 200) / 3.0)


def test_invalid_representation_raises_with_code():
    with pytest.raises(dsu.DsuError) as info:
        dsu.bitrate(dsu.DiscreteRepresentation([dsu.UnitStream([1], 4)], 0.0))
    assert info.value.code == "invalid-representation"
    with pytest.raises(ValueError):
        dsu.UnitStream([5], 4)


def test_kmeans_and_quantize():
    corners = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    result = dsu.kmeans_train(corners, k=4, seed=0)
    assert result.inertia == 0.0
    got = sorted(map(tuple, result.codebook.centroids.tolist()))
    assert got == [(0, 0), (0, 1), (1, 0), (1, 1)]

    rng = np.random.default_rng(0)
    data = rng.normal(size=(500, 3)) + np.repeat(np.arange(5)[:, None] * 4.0, 100, axis=0)
    a = dsu.kmeans_train(data, k=8, seed=3, num_threads=1)
    b = dsu.kmeans_train(data, k=8, seed=3, num_threads=4)
    assert np.array_equal(a.codebook.centroids, b.codebook.centroids)
    assert all(x >= y for x, y in zip(a.inertia_history, a.inertia_history[1:]))
    units = dsu.quantize(a.codebook.centroids, a.codebook)
    assert list(units.tokens) == list(range(8))


def test_dedup_and_bpe_round_trip():
    s = dsu.dedup(dsu.UnitStream([5, 5, 2, 2, 2, 5], 8))
    assert list(s.tokens) == [5, 2, 5]
    corpus = [dsu.UnitStream([0, 1, 0, 1, 2, 0, 1], 3), dsu.UnitStream([0, 1, 2, 2], 3)]
    model = dsu.bpe_train(corpus, 6)
    assert model.total_vocab_size <= 6
    assert model.merges[0] == (0, 1, 3)
    for stream in corpus:
        enc = dsu.bpe_encode(stream, model)
        assert len(enc) <= len(stream)
        assert dsu.bpe_decode(enc, model) == stream


def test_text_metrics():
    assert dsu.edit_distance("kitten", "sitting") == 3
    assert dsu.normalize_text("  a \t b ") == "a b"
    assert dsu.cer([("hello", "hello")]) == 0.0
    assert dsu.cer([("abcd", "abxd"), ("ef", "")]) == pytest.approx(3 / 6)
    assert dsu.wer([("the cat sat", "the cat")]) == pytest.approx(1 / 3)


def test_signal_metrics(tmp_path):
    rate = 16000
    t = np.arange(rate) / rate
    ref = 0.5 * np.sin(2 * math.pi * 220 * t)
    syn = 0.5 * np.sin(2 * math.pi * 233 * t)
    path = tmp_path / "ref.wav"
    dsu.write_wav(str(path), ref, rate)
    back, back_rate = dsu.read_wav(str(path))
    assert back_rate == rate
    assert np.max(np.abs(back - ref)) < 1e-4

    c = dsu.mel_cepstrum(back, rate)
    assert c.num_coeffs == 13
    assert dsu.mcd(c, c) == 0.0
    path_pairs, cost = dsu.dtw_align(c, c)
    assert cost == 0.0 and len(path_pairs) == c.frames

    contour = dsu.extract_f0(ref, rate)
    assert contour.voiced_count() > 0.9 * len(contour)
    self_rmse = dsu.f0_rmse(back, back, rate)
    assert self_rmse.value == 0.0 and not self_rmse.no_overlap
    assert dsu.f0_rmse(ref, syn, rate).value == pytest.approx(math.log(233 / 220), rel=0.1)


def test_rank_asr_table():
    rows = {
        "B1": (2.37, 22.40, 356.19),
        "S1": (1.91, 16.03, 946.77),
        "S2": (2.21, 17.32, 262.64),
        "S3": (1.98, 20.23, 599.20),
    }
    cards = [
        dsu.ScoreCard(team, "asr", {"cer_en": en, "cer_ml": ml, "bitrate": br})
        for team, (en, ml, br) in rows.items()
    ]
    (board,) = dsu.rank_track("asr", cards)
    assert board.order() == ["S1", "S2", "S3", "B1"]
    averages = [e.average_rank for e in board.entries]
    assert averages == pytest.approx([2.0, 2.0, 8 / 3, 10 / 3], abs=1e-9)
    assert "R2" in board.entries[0].tiebreak_trace
    assert dsu.rank_metric([3.0, 1.0, 1.0], "ascending") == [3.0, 1.5, 1.5]
    with pytest.raises(dsu.DsuError) as info:
        dsu.rank_track("asr", cards, tie_mode="dense")
    assert info.value.code == "config"


def test_validate_submission(tmp_path):
    (tmp_path / "units.txt").write_text("#vocab_size=4 #streams=1\nu1\t1 2 9\n")
    (tmp_path / "durations.tsv").write_text("u1\t1.0\n")
    report = dsu.validate_submission(str(tmp_path))
    assert not report["ok"]
    assert [f["code"] for f in report["findings"]] == ["invalid-token"]
    assert report["findings"][0]["utt_id"] == "u1"
