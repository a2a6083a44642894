import numpy as np
import pytest

from aasist3.checkpoint import MAGIC, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from aasist3.config import pocket_model_config
from aasist3.dsp import chunk_signal, pre_emphasis
from aasist3.errors import CheckpointConfigError, CheckpointFormatError, CheckpointShapeError, CheckpointVersionError
from aasist3.graph import HeteroState
from aasist3.kan import KanLayer
from aasist3.model import (
    BONAFIDE,
    Aasist3Model,
    aggregate_branches,
    fuse_scores,
    graphs_from_features,
    readout,
    score_utterance,
)
from aasist3.numerics import Tensor, concat

SR = 16000


@pytest.fixture(scope="module")
def model():
    m = Aasist3Model(pocket_model_config(seed=3))
    rng = np.random.default_rng(0)
    # move the zero-initialised embeddings off zero so they matter in the round trip
    m.pe_t.data[...] = rng.normal(scale=0.1, size=m.pe_t.shape)
    m.pe_s.data[...] = rng.normal(scale=0.1, size=m.pe_s.shape)
    m.stack_node.data[...] = rng.normal(scale=0.1, size=m.stack_node.shape)
    return m


def tone(seconds, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * SR)) / SR
    return 0.3 * np.sin(2 * np.pi * 440 * t) + 0.05 * rng.normal(size=t.size)


def state(rng, b, n_t, n_s, d):
    return HeteroState(Tensor(rng.normal(size=(b, n_t, d))), Tensor(rng.normal(size=(b, n_s, d))),
                       Tensor(rng.normal(size=(b, d))))


class TestGraphs:
    def test_nonnegative_before_embedding(self):
        x = Tensor(np.random.default_rng(1).normal(size=(2, 3, 4, 5)))
        g_t, g_s = graphs_from_features(x, Tensor(np.zeros((5, 3))), Tensor(np.zeros((4, 3))))
        assert g_t.shape == (2, 5, 3) and g_s.shape == (2, 4, 3)
        assert np.all(g_t.data >= 0) and np.all(g_s.data >= 0)
        np.testing.assert_array_equal(g_t.data, np.abs(x.data).max(axis=2).swapaxes(1, 2))

    def test_constant_input(self):
        x = Tensor(np.full((1, 2, 3, 4), -2.0))
        g_t, g_s = graphs_from_features(x, Tensor(np.ones((4, 2))), Tensor(np.zeros((3, 2))))
        assert np.all(g_t.data == 3.0) and np.all(g_s.data == 2.0)

    def test_embedding_shape_mismatch(self):
        with pytest.raises(ValueError):
            graphs_from_features(Tensor(np.zeros((1, 2, 3, 4))), Tensor(np.zeros((3, 2))), Tensor(np.zeros((3, 2))))


class TestAggregation:
    def test_single_branch_concatenates_stages(self):
        rng = np.random.default_rng(2)
        pre, s2, s3 = state(rng, 2, 4, 3, 5), state(rng, 2, 4, 3, 5), state(rng, 2, 2, 2, 5)
        h_t, h_s, s_f = aggregate_branches(pre, [(s2, s3)])
        assert h_t.shape == (2, 10, 5) and h_s.shape == (2, 8, 5)
        np.testing.assert_array_equal(h_t.data, np.concatenate([pre.h_t.data, s2.h_t.data, s3.h_t.data], axis=1))
        np.testing.assert_array_equal(s_f.data, np.maximum(np.maximum(pre.stack.data, s2.stack.data), s3.stack.data))
        _, _, s_sum = aggregate_branches(pre, [(s2, s3)], "sum")
        np.testing.assert_allclose(s_sum.data, pre.stack.data + s2.stack.data + s3.stack.data, atol=1e-15)

    def test_cross_branch_max(self):
        rng = np.random.default_rng(3)
        pre = state(rng, 1, 3, 3, 2)
        outs = [(state(rng, 1, 3, 3, 2), state(rng, 1, 2, 2, 2)) for _ in range(4)]
        h_t, _, _ = aggregate_branches(pre, outs)
        expected = np.max([o[1].h_t.data for o in outs], axis=0)
        np.testing.assert_array_equal(h_t.data[:, 6:], expected)

    def test_branch_order_irrelevant(self):
        rng = np.random.default_rng(4)
        pre = state(rng, 1, 3, 3, 2)
        outs = [(state(rng, 1, 3, 3, 2), state(rng, 1, 2, 2, 2)) for _ in range(3)]
        a = aggregate_branches(pre, outs)
        b = aggregate_branches(pre, outs[::-1])
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.data, y.data)

    def test_errors(self):
        rng = np.random.default_rng(5)
        pre = state(rng, 1, 3, 3, 2)
        with pytest.raises(ValueError):
            aggregate_branches(pre, [])
        with pytest.raises(ValueError):
            aggregate_branches(pre, [(state(rng, 1, 3, 3, 2), state(rng, 1, 2, 2, 2))], "mean")
        with pytest.raises(ValueError):
            aggregate_branches(pre, [(state(rng, 1, 3, 3, 2), state(rng, 1, 2, 2, 2)),
                                     (state(rng, 1, 3, 3, 2), state(rng, 1, 1, 2, 2))])


class TestReadout:
    def test_single_node_graphs(self):
        rng = np.random.default_rng(6)
        layer = KanLayer(5 * 3, 2, rng)
        h_t, h_s, s = (Tensor(rng.normal(size=shape)) for shape in [(2, 1, 3), (2, 1, 3), (2, 3)])
        out = readout(h_t, h_s, s, layer)
        t, f = h_t.data[:, 0], h_s.data[:, 0]
        expected = layer(Tensor(np.concatenate([t, t, f, f, s.data], axis=-1))).data
        np.testing.assert_allclose(out.data, expected, atol=1e-15)

    def test_width_is_five_d(self):
        rng = np.random.default_rng(7)
        h_t, h_s, s = (Tensor(rng.normal(size=shape)) for shape in [(2, 4, 3), (2, 2, 3), (2, 3)])
        assert readout(h_t, h_s, s, KanLayer(15, 2, rng)).shape == (2, 2)
        with pytest.raises(ValueError):
            readout(h_t, h_s, s, KanLayer(12, 2, rng))


class TestModel:
    def test_pocket_shapes(self, model):
        assert model.feature_shape == (8, 8, 32)
        assert sum(p.size for p in model.parameters()) == 59178
        x = pre_emphasis(tone(4.0))
        assert model(np.stack([x, x])).shape == (2, 2)

    def test_wrong_length(self, model):
        with pytest.raises(ValueError):
            model(np.zeros(1000))

    def test_seeded_construction(self):
        a = Aasist3Model(pocket_model_config(seed=11)).state_dict()
        b = Aasist3Model(pocket_model_config(seed=11)).state_dict()
        assert all(np.array_equal(a[k], b[k]) for k in a)

    def test_probability_matches_softmax(self, model):
        x = pre_emphasis(tone(4.0, seed=1))
        logits = model(x).data[0]
        p = np.exp(logits - logits.max())
        p /= p.sum()
        assert model.bonafide_probability(x)[0] == pytest.approx(p[BONAFIDE], abs=1e-12)

    def test_batching_invariant(self, model):
        chunks = np.stack([pre_emphasis(tone(4.0, seed=s)) for s in range(3)])
        np.testing.assert_allclose(model.bonafide_probability(chunks, batch_size=1),
                                   model.bonafide_probability(chunks, batch_size=3), atol=1e-12)

    def test_four_second_single_chunk(self, model):
        x = tone(4.0, seed=2)
        assert score_utterance(x, model) == pytest.approx(model.bonafide_probability(pre_emphasis(x))[0], abs=1e-12)

    def test_eight_second_mean_of_three_chunks(self, model):
        x = tone(8.0, seed=3)
        chunks = chunk_signal(pre_emphasis(x))
        assert len(chunks) == 3
        probs = [model.bonafide_probability(c)[0] for c in chunks]
        assert abs(score_utterance(x, model) - np.mean(probs)) < 1e-9

    def test_fuse(self):
        assert fuse_scores([0.2, 0.4]) == pytest.approx(0.3)
        with pytest.raises(ValueError):
            fuse_scores([])


class TestCheckpoint:
    def test_round_trip_logits(self, model, tmp_path):
        save_checkpoint(model, tmp_path / "m.ckpt")
        loaded = load_checkpoint(tmp_path / "m.ckpt", expected_config=model.config)
        x = np.stack([pre_emphasis(tone(4.0, seed=s)) for s in range(2)])
        assert np.max(np.abs(loaded(x).data - model(x).data)) < 1e-6
        again = tmp_path / "again.ckpt"
        save_checkpoint(loaded, again)
        assert again.read_bytes() == (tmp_path / "m.ckpt").read_bytes()

    def test_running_stats_stored(self, model):
        _, state = decode_checkpoint(encode_checkpoint(model.config, model.state_dict()))
        assert any("running_mean" in k for k in state)

    def test_truncated(self, model, tmp_path):
        data = encode_checkpoint(model.config, model.state_dict())
        for cut in (4, len(MAGIC) + 6, len(data) // 2, len(data) - 1):
            with pytest.raises(CheckpointFormatError):
                decode_checkpoint(data[:cut])

    def test_corrupted_and_trailing(self, model):
        data = bytearray(encode_checkpoint(model.config, model.state_dict()))
        data[-100] ^= 0xFF
        with pytest.raises(CheckpointFormatError, match="checksum"):
            decode_checkpoint(bytes(data))
        with pytest.raises(CheckpointFormatError):
            decode_checkpoint(encode_checkpoint(model.config, {}) + b"x")

    def test_version(self, model):
        data = bytearray(encode_checkpoint(model.config, {}))
        data[len(MAGIC)] = 2
        with pytest.raises(CheckpointVersionError):
            decode_checkpoint(bytes(data))

    def test_config_mismatch(self, model, tmp_path):
        save_checkpoint(model, tmp_path / "m.ckpt")
        with pytest.raises(CheckpointConfigError):
            load_checkpoint(tmp_path / "m.ckpt", expected_config=pocket_model_config(seed=4))

    def test_shape_mismatch(self, model, tmp_path):
        state = model.state_dict()
        state["stack_node"] = np.zeros(3)
        (tmp_path / "bad.ckpt").write_bytes(encode_checkpoint(model.config, state))
        with pytest.raises(CheckpointShapeError):
            load_checkpoint(tmp_path / "bad.ckpt")
