import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emofeat import autograd as ag
from emofeat.attention import (
    DualAttention, EegTransformerBaseline, MultiHeadAttention, SeBlock, SkipGate, SpaceTimeAttention,
    TriStreamConfig, TriStreamModel, attention_cost, grad_check, run_suite, scaled_dot_attention, se_forward,
    se_param_count, skip_gate_fuse,
)
from emofeat.attention.gradcheck import objective
from emofeat.attention.layers import column_reweight
from emofeat.eeg import PAIRS
from emofeat.numkit import Rng, conv1d, sigmoid

finite = st.floats(-20, 20, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def suite():
    return run_suite(seed=1)


# scaled dot-product attention


def test_attention_single_row_returns_v():
    v = np.array([[3.0, -1.0, 2.0]])
    out = scaled_dot_attention(np.ones((1, 3)), np.ones((1, 3)), v)
    assert np.array_equal(out, v)


def test_attention_equal_keys_average_values():
    rng = np.random.default_rng(0)
    q, v = rng.normal(size=(4, 3)), rng.normal(size=(5, 3))
    k = np.tile(rng.normal(size=(1, 3)), (5, 1))
    assert np.allclose(scaled_dot_attention(q, k, v), np.tile(v.mean(axis=0), (4, 1)))


def test_attention_two_by_two_hand_case():
    e = np.eye(2)
    out, w = scaled_dot_attention(e, e, e, return_weights=True)
    a = np.exp(1 / np.sqrt(2)) / (np.exp(1 / np.sqrt(2)) + 1)
    assert np.allclose(w, [[a, 1 - a], [1 - a, a]])
    assert np.allclose(out, w)


def test_attention_shape_errors():
    with pytest.raises(ValueError):
        scaled_dot_attention(np.ones((2, 3)), np.ones((2, 4)), np.ones((2, 3)))
    with pytest.raises(ValueError):
        scaled_dot_attention(np.ones((2, 3)), np.ones((2, 3)), np.ones((3, 3)))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 4), elements=finite), arrays(np.float64, (6, 4), elements=finite))
def test_attention_rows_are_distributions(q, k):
    _, w = scaled_dot_attention(q, k, np.ones((6, 2)), return_weights=True)
    assert np.all(w >= 0) and np.allclose(w.sum(axis=1), 1.0, atol=1e-9)


def test_column_reweight_scales_one_column():
    rng = np.random.default_rng(3)
    q, k, v = rng.normal(size=(3, 6, 4))
    _, base = ag.scaled_dot_attention(q, k, v, return_weights=True)
    _, same = ag.scaled_dot_attention(q, k, v, weight_fn=column_reweight(1, 1.0), return_weights=True)
    _, emph = ag.scaled_dot_attention(q, k, v, weight_fn=column_reweight(1, 1.2), return_weights=True)
    assert np.allclose(same.data, base.data, atol=1e-15)
    assert np.allclose(emph.data.sum(axis=-1), 1.0, atol=1e-12)
    ratio = (emph.data[:, 1] / emph.data[:, 0]) / (base.data[:, 1] / base.data[:, 0])
    assert np.allclose(ratio, 1.2)
    others = np.delete(emph.data, 1, axis=1) / np.delete(base.data, 1, axis=1)
    assert np.allclose(others, others[:, :1])  # remaining columns share one factor per row


# squeeze-and-excitation


def test_se_zero_w1_halves_input():
    block = SeBlock(8, 4, Rng(0))
    block.parameters()["W1"].data[...] = 0
    x = np.random.default_rng(1).normal(size=(8, 5))
    assert np.allclose(se_forward(x, block), 0.5 * x)


def test_se_zero_input_and_shape_check():
    block = SeBlock(8, 2, Rng(0))
    assert np.all(se_forward(np.zeros((8, 7)), block) == 0)
    with pytest.raises(ValueError):
        se_forward(np.zeros((6, 7)), block)
    with pytest.raises(ValueError):
        SeBlock(8, 3)


def test_se_param_count():
    assert se_param_count(2048, 16) == 524_288
    assert se_param_count(2048, 1) == 8_388_608
    assert SeBlock(64, 16).num_params() == se_param_count(64, 16)


# skip gate


def test_skip_gate_default_blend():
    pre, att = np.array([1.0, 0.0, 2.0]), np.array([0.0, 1.0, -2.0])
    out = skip_gate_fuse(pre, att, SkipGate(-2.0))
    assert np.allclose(out, 0.88080 * pre + 0.11920 * att, atol=1e-5)
    assert abs(SkipGate(-2.0).alpha - 0.11920) < 1e-5


def test_skip_gate_equal_paths_and_saturation():
    x = np.random.default_rng(0).normal(size=(3, 4))
    assert np.allclose(skip_gate_fuse(x, x, 0.7), x)
    y = np.random.default_rng(1).normal(size=(3, 4))
    assert np.allclose(skip_gate_fuse(x, y, 30.0), y, atol=1e-9)
    with pytest.raises(ValueError):
        skip_gate_fuse(x, y[:2], 0.0)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 6, elements=finite), arrays(np.float64, 6, elements=finite), finite)
def test_skip_gate_convex(pre, att, w):
    out = skip_gate_fuse(pre, att, w)
    lo, hi = np.minimum(pre, att), np.maximum(pre, att)
    assert np.all(out >= lo - 1e-9) and np.all(out <= hi + 1e-9)


def test_skip_gate_w_gradient_closed_form():
    rng = np.random.default_rng(2)
    pre, att, up = rng.normal(size=(3, 7))
    gate = SkipGate(-2.0)
    ag.sum_(ag.mul(gate(pre, att), up)).backward()
    s = sigmoid(-2.0)
    assert abs(gate.parameters()["w"].grad - s * (1 - s) * np.sum((att - pre) * up)) < 1e-6


# gradient checks


def test_grad_suite_below_tolerance(suite):
    assert len(suite) >= 30
    bad = {k: v for k, v in suite.items() if not v < 1e-4}
    assert not bad


def test_grad_check_linear_is_tight(suite):
    assert suite["linear"] < 1e-7


def test_grad_check_scaled_dot_attention_3x4():
    rng = np.random.default_rng(4)
    f, theta = objective(lambda q, k, v: ag.scaled_dot_attention(q, k, v),
                         {"q": rng.normal(size=(3, 4)), "k": rng.normal(size=(3, 4)), "v": rng.normal(size=(3, 4))})
    assert grad_check(f, theta, Rng(0)) < 1e-4


def test_grad_check_catches_wrong_gradient():
    f = lambda th: (float(np.sum(th**2)), 3 * th)  # noqa: E731
    assert grad_check(f, np.ones(5), Rng(0)) > 0.4


def test_grad_check_rejects_non_finite():
    with pytest.raises(FloatingPointError):
        grad_check(lambda th: (np.inf, th), np.ones(3), Rng(0))


# eeg transformer baseline


def small_m1(**kw):
    return EegTransformerBaseline(seed=0, d_model=8, heads=2, layers=2, d_ff=12, **kw)


def test_m1_shape_and_rows():
    m = small_m1()
    trace = []
    out = m(np.random.default_rng(0).normal(size=(30, 40)), trace)
    assert out.shape == (1, 5) and np.all(np.isfinite(out.data))
    assert len(trace) == 2 and all(np.allclose(t.sum(axis=-1), 1.0, atol=1e-9) for t in trace)
    # conv front-end keeps the sequence length
    assert m.tokens(np.zeros((30, 40))).shape == (1, 40, 8)


def test_m1_default_front_end_shapes():
    m = EegTransformerBaseline()
    p = m.parameters()
    assert p["front.w1"].shape == (60, 30, 11) and p["front.w2"].shape == (60, 60, 11)
    assert sum(1 for k in p if k.endswith("attn.W_q")) == 6


def test_m1_zero_input_zero_head_equal_logits():
    m = small_m1(zero_init_head=True)
    logits = m(np.zeros((30, 40))).data[0]
    assert np.all(logits == logits[0])


def test_m1_permutation_invariant_without_positions():
    m = small_m1(positional=False)
    tok = m.tokens(np.random.default_rng(1).normal(size=(30, 40))).data
    perm = np.random.default_rng(2).permutation(40)
    assert np.allclose(m.encode(tok).data, m.encode(tok[:, perm]).data, atol=1e-6)


# tri-stream model


def small_tri(**kw):
    return TriStreamModel(TriStreamConfig(feat_dim=8, heads=2, hidden=6, seed=3, **kw))


def trial(seed=0, t=40):
    return np.random.default_rng(seed).normal(size=(30, t))


def test_tri_config_validation():
    with pytest.raises(ValueError):
        TriStreamModel(TriStreamConfig(pairs=PAIRS[:5]))
    with pytest.raises(ValueError):
        TriStreamModel(TriStreamConfig(feat_dim=10, heads=4))
    with pytest.raises(ValueError):
        TriStreamModel(TriStreamConfig(kernel=10))
    with pytest.raises(ValueError):
        small_tri()(np.zeros((29, 40)))


def test_tri_default_front_end_sizes():
    m = TriStreamModel()
    p = m.parameters()
    assert p["w1"].shape == (30, 60, 11) and p["w2"].shape == (60, 60, 11)


@settings(max_examples=40, deadline=None)
@given(finite, arrays(np.float64, 3, elements=finite))
def test_tri_fusion_weights(c, logits):
    m = small_tri()
    assert np.allclose(m.fusion_weights(), 1 / 3)
    m.fusion.data = np.full(3, c)
    assert np.allclose(m.fusion_weights(), 1 / 3)
    m.fusion.data = logits
    w = m.fusion_weights()
    assert np.all(w >= 0) and abs(w.sum() - 1) < 1e-12


def test_tri_gate_carries_conv_path():
    m = small_tri()
    assert abs(m.gate.alpha - 0.73106) < 1e-5
    conv, streams = m.pooled_paths(trial(1))
    fused = sum(s.data / 3 for s in streams)
    z = m.gate(fused, conv).data
    assert np.allclose(z, 0.73106 * conv.data + 0.26894 * fused, atol=1e-5)


def conv_only_oracle(m, x):
    """Plain-numpy conv path: standard two-layer conv, mean over time, gate, head."""
    p = {k: v.data for k, v in m.parameters().items()}
    pad = m.cfg.kernel // 2
    h = np.maximum(conv1d(x, p["w1"].transpose(1, 0, 2), padding=pad) + p["b1"][:, None], 0)
    h = np.maximum(conv1d(h, p["w2"], padding=pad) + p["b2"][:, None], 0)
    z = sigmoid(m.cfg.gate_w) * h.mean(axis=1)
    hid = np.maximum(z @ p["head1.W"] + p["head1.b"], 0)
    return hid @ p["head2.W"] + p["head2.b"]


def test_tri_streams_off_matches_conv_oracle():
    m = small_tri()
    x = trial(2)
    out = m(x, stream_mask=(0.0, 0.0, 0.0)).data[0]
    assert np.allclose(out, conv_only_oracle(m, x), atol=1e-9)
    assert not np.allclose(m(x).data[0], out, atol=1e-6)


def test_tri_attention_rows_and_emphasis():
    x = trial(3)
    plain, emph = small_tri(emphasis=False), small_tri()
    tr_plain, tr_emph = [], []
    plain(x, tr_plain)
    emph(x, tr_emph)
    assert len(tr_emph) == 3
    for t in tr_plain + tr_emph:
        assert np.allclose(t.sum(axis=-1), 1.0, atol=1e-9)
    # spatial and temporal streams are unaffected by the pair emphasis
    for a, b in zip(tr_plain[:2], tr_emph[:2]):
        assert np.array_equal(a, b)
    # the asymmetry stream without emphasis is plain softmax attention
    diff_rows = tr_plain[2]
    k = PAIRS.index(next(p for p in PAIRS if p.weight != 1.0))
    ratio = (tr_emph[2][..., k] / tr_emph[2][..., 0]) / (diff_rows[..., k] / diff_rows[..., 0])
    assert np.allclose(ratio, 1.2)


def test_tri_asym_stream_matches_standard_attention_oracle():
    m = small_tri(emphasis=False)
    x = trial(4)
    e = m.electrode_responses(x[None]).data  # [1, C, F, T]
    tok = e.transpose(0, 3, 1, 2)
    left, right = [p.left for p in PAIRS], [p.right for p in PAIRS]
    diff = tok[:, :, right] - tok[:, :, left]  # [1, T, 6, F]
    w = {k: v.data for k, v in m.asym.parameters().items()}
    ref = []
    for tt in range(diff.shape[1]):
        d = diff[0, tt]
        heads = [scaled_dot_attention((d @ w["W_q"])[:, h * 4:(h + 1) * 4], (d @ w["W_k"])[:, h * 4:(h + 1) * 4],
                                      (d @ w["W_v"])[:, h * 4:(h + 1) * 4]) for h in range(2)]
        ref.append(np.concatenate(heads, axis=1) @ w["W_o"])
    _, streams = m.pooled_paths(x)
    assert np.allclose(streams[2].data[0], np.mean(ref, axis=(0, 1)), atol=1e-10)


def test_tri_strided_config_runs():
    m = TriStreamModel(TriStreamConfig(feat_dim=8, heads=2, stride=10, pool=5, hidden=6))
    assert m(np.random.default_rng(0).normal(size=(2, 30, 500))).shape == (2, 5)


# dual attention


def test_dual_default_grid_size():
    m = DualAttention()
    assert m.shape[0] * m.shape[1] == 1212
    assert abs(m.gate.alpha - 0.11920) < 1e-5


def test_dual_zero_output_projection_keeps_cls():
    m = DualAttention(d_model=8, heads=2, n_time=5, n_freq=3, seed=2)
    for name, p in m.parameters().items():
        if name.endswith("W_o"):
            p.data[...] = 0
    cls = np.random.default_rng(0).normal(size=8)
    out = m(np.random.default_rng(1).normal(size=(5, 3, 8)), cls).data
    assert out.shape == (8,)
    assert np.allclose(out, 0.88080 * cls, atol=1e-5)


def test_dual_rows_and_shape_check():
    m = DualAttention(d_model=8, heads=2, n_time=5, n_freq=3)
    trace = []
    m(np.random.default_rng(2).normal(size=(5, 3, 8)), np.zeros(8), trace)
    assert len(trace) == 4
    assert trace[0].shape[-1] == 5 and trace[1].shape[-1] == 3
    assert all(np.allclose(t.sum(axis=-1), 1.0, atol=1e-9) for t in trace)
    with pytest.raises(ValueError):
        m(np.zeros((4, 3, 8)), np.zeros(8))


# space-time attention


def test_space_time_shape_and_rows():
    m = SpaceTimeAttention(d_model=8, heads=2, n_frames=4, n_patches=6, blocks=2)
    trace = []
    out = m(np.random.default_rng(0).normal(size=(4, 6, 8)), trace)
    assert out.shape == (8,)
    assert [t.shape[-1] for t in trace] == [6, 4, 6, 4]
    assert all(np.allclose(t.sum(axis=-1), 1.0, atol=1e-9) for t in trace)
    with pytest.raises(ValueError):
        m(np.zeros((4, 5, 8)))


def test_space_time_single_frame_is_spatial_only():
    m = SpaceTimeAttention(d_model=8, heads=2, n_frames=3, n_patches=5, blocks=2, seed=1)
    grid = np.random.default_rng(1).normal(size=(1, 5, 8))
    # with n = 1 every temporal attention row is [1], so the time step
    # reduces to the value and output projections
    x = ag.const(grid + m.pos_s.data + m.pos_t.data[:1])
    for s_att, t_att in m.blocks:
        w = t_att.parameters()
        x = ag.const(s_att(x).data @ w["W_v"].data @ w["W_o"].data)
    trace = []
    out = m(grid, trace)
    assert all(np.all(t == 1.0) for t in trace[1::2])
    assert np.allclose(out.data, x.data.mean(axis=(0, 1)), atol=1e-12)


def test_space_time_uniform_attention_matches_full_attention():
    m = SpaceTimeAttention(d_model=4, heads=1, n_frames=2, n_patches=3, blocks=1)
    for name, p in m.parameters().items():
        if name.startswith("pos"):
            p.data[...] = 0
        elif name.endswith(("W_q", "W_k")):
            p.data[...] = 0  # every attention logit equal
        else:
            p.data[...] = np.eye(4)
    grid = np.random.default_rng(3).normal(size=(2, 3, 4))
    tokens = grid.reshape(6, 4)
    full = scaled_dot_attention(np.zeros((6, 4)), np.zeros((6, 4)), tokens).mean(axis=0)
    assert np.allclose(m(grid).data, full, atol=1e-12)


# attention cost


def test_attention_cost_examples():
    r = attention_cost(25, 196)
    assert r.full_entries == 24_010_000 and r.factorized_entries == 1_082_900
    assert 22.0 <= r.ratio <= 22.4 and abs(r.ratio - 22.17) < 0.01
    one = attention_cost(1, 1)
    assert (one.full_entries, one.factorized_entries, one.ratio, one.degenerate) == (1, 2, 0.5, True)
    with pytest.raises(ValueError):
        attention_cost(0, 3)


@given(st.integers(2, 300), st.integers(2, 300))
def test_attention_cost_factorization_wins(t, p):
    r = attention_cost(t, p)
    # ratio = T*P / (T + P), which is exactly 1 at T = P = 2
    assert not r.degenerate and r.ratio >= 1
    assert (r.ratio > 1) == ((t, p) != (2, 2))
    assert np.isclose(r.ratio, t * p / (t + p))


def test_mha_rejects_bad_dims():
    with pytest.raises(ValueError):
        MultiHeadAttention(6, 4, Rng(0))
    with pytest.raises(ValueError):
        MultiHeadAttention(4, 2, Rng(0))(np.zeros((3, 5)))
