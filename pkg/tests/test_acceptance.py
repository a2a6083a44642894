"""Acceptance criteria, one test and one PASS/FAIL line each.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.  The lines are written straight to the
terminal, so they show even when pytest captures output.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from aasist3.checkpoint import load_checkpoint, save_checkpoint
from aasist3.config import pocket_model_config
from aasist3.diagnostics import LAYER_TOL, MODEL_TOL, run_gradcheck_suite
from aasist3.dsp import SincFilterbank, chunk_signal, hamming, pre_emphasis, sinc_conv
from aasist3.eval import compute_eer, compute_min_dcf, parse_protocol, read_scores, split_by_label
from aasist3.graph import HeteroState, KanGal, KanGraphPool, KanHsGal, block_assignment, pool_size, split_heterogeneous
from aasist3.kan import bspline_basis, build_grid
from aasist3.model import Aasist3Model, score_utterance
from aasist3.numerics import Tensor, concat
from oracles import (
    brute_crossing,
    brute_force_top_k,
    brute_min_dcf,
    brute_rocch,
    enumerate_block_rule,
    invert_pre_emphasis,
    random_scores,
)

SR = 16000


@pytest.fixture
def report(capsys):
    def emit(number, title, checks):
        ok = all(passed for _, passed in checks)
        failed = [name for name, passed in checks if not passed]
        detail = "; ".join(name for name, _ in checks) if ok else "failed: " + "; ".join(failed)
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
        assert ok, failed

    return emit


def test_criterion_1_gradients(report):
    start = time.perf_counter()
    results = run_gradcheck_suite(seed=0)
    seconds = time.perf_counter() - start
    checks = [(f"{r.name} {r.error:.1e} <= {r.tolerance:.0e}", r.passed) for r in results]
    checks.append((f"layer tol {LAYER_TOL:.0e}, model tol {MODEL_TOL:.0e}", LAYER_TOL <= 1e-4 and MODEL_TOL <= 1e-3))
    checks.append((f"runtime {seconds:.0f} s < 120 s", seconds < 120))
    report(1, "gradient checks", checks)


def test_criterion_2_kan_basis(report):
    grid = build_grid()
    x = np.linspace(-1.0, 1.0, 100)
    values = bspline_basis(x, grid)
    unity = float(np.max(np.abs(values.sum(axis=1) - 1.0)))
    dense = np.linspace(-2.0, 2.0, 4001)
    basis = bspline_basis(dense, grid)
    support_ok = all(
        np.all(basis[(dense < grid.knots[i]) | (dense >= grid.knots[i + grid.order + 1]), i] == 0.0)
        for i in range(grid.n_basis)
    )
    outside = (dense < grid.knots[0]) | (dense >= grid.knots[-1])
    report(2, "KAN basis", [
        (f"partition of unity err {unity:.1e} < 1e-9", unity < 1e-9),
        (f"{grid.knots.size} knots, h={grid.h}", grid.knots.size == 25 and grid.h == 0.125),
        ("compact support exact", bool(support_ok)),
        ("zero outside knot span", bool(np.all(basis[outside] == 0.0))),
    ])


def test_criterion_3_attention_and_pooling(report):
    rng = np.random.default_rng(0)
    gal = KanGal(4, 4, rng)
    att = gal.attention(Tensor(rng.normal(size=(3, 9, 4)))).data
    gal_err = float(np.max(np.abs(att.sum(-1) - 1.0)))

    hs = KanHsGal(4, 4, 4, rng)
    state = HeteroState(Tensor(rng.normal(size=(2, 5, 4))), Tensor(rng.normal(size=(2, 4, 4))),
                        Tensor(rng.normal(size=(2, 4))))
    h_st = hs.merge(state)
    secondary = hs.secondary_map(hs.primary_map(h_st), 5, 4).data
    stack_att = hs.stack_attention(h_st, state.stack).data
    hs_err = float(max(np.max(np.abs(secondary.sum(-1) - 1.0)), np.max(np.abs(stack_att.sum(-1) - 1.0))))

    topk_ok = True
    for n in range(1, 17):
        pool = KanGraphPool(3, 0.5, rng)
        h = Tensor(rng.normal(size=(1, n, 3)))
        gate = pool.score(h).sigmoid().data[0, :, 0]
        expected = brute_force_top_k(gate, pool_size(n, 0.5))
        topk_ok &= np.array_equal(pool(h).data[0], gate[expected, None] * h.data[0, expected])

    blocks_ok = np.array_equal(block_assignment(3, 2), enumerate_block_rule(3, 2))
    literal_ok = np.array_equal(block_assignment(3, 2, "literal"), enumerate_block_rule(3, 2, literal=True))

    merged = Tensor(rng.normal(size=(2, 7, 4)))
    h_t, h_s = split_heterogeneous(merged, 4, 3)
    round_trip = np.array_equal(concat([h_t, h_s], axis=1).data, merged.data)
    report(3, "attention and pooling", [
        (f"GAL rows sum to 1 (err {gal_err:.1e})", gal_err < 1e-9),
        (f"HS-GAL and stack rows sum to 1 (err {hs_err:.1e})", hs_err < 1e-9),
        ("pool equals brute-force top-k for N=1..16", bool(topk_ok)),
        ("3+2 block rule equals case enumeration", bool(blocks_ok and literal_ok)),
        ("split/merge round trip exact", bool(round_trip)),
    ])


def test_criterion_4_permutation_symmetry(report):
    rng = np.random.default_rng(1)
    gal = KanGal(4, 4, rng)
    h = rng.normal(size=(2, 8, 4))
    perm = rng.permutation(8)
    gal_err = float(np.max(np.abs(gal(Tensor(h[:, perm])).data - gal(Tensor(h)).data[:, perm])))

    hs = KanHsGal(4, 4, 4, rng)
    state = HeteroState(Tensor(rng.normal(size=(2, 6, 4))), Tensor(rng.normal(size=(2, 5, 4))),
                        Tensor(rng.normal(size=(2, 4))))
    p_t, p_s = rng.permutation(6), rng.permutation(5)
    out = hs(state)
    out_p = hs(HeteroState(Tensor(state.h_t.data[:, p_t]), Tensor(state.h_s.data[:, p_s]), state.stack))
    hs_err = float(max(np.max(np.abs(out_p.h_t.data - out.h_t.data[:, p_t])),
                       np.max(np.abs(out_p.h_s.data - out.h_s.data[:, p_s]))))
    stack_err = float(np.max(np.abs(out_p.stack.data - out.stack.data)))
    report(4, "permutation symmetry", [
        (f"GAL equivariant (err {gal_err:.1e})", gal_err < 1e-6),
        (f"HS-GAL equivariant (err {hs_err:.1e})", hs_err < 1e-6),
        (f"stack node invariant (err {stack_err:.1e})", stack_err < 1e-6),
    ])


def test_criterion_5_front_end(report):
    x = np.random.default_rng(2).uniform(-1, 1, 8000)
    inverse_err = float(np.max(np.abs(invert_pre_emphasis(pre_emphasis(x)) - x)))
    bank = SincFilterbank()
    symmetry = float(np.max(np.abs(bank.taps - bank.taps[:, ::-1])))
    w0 = float(hamming(bank.taps.shape[1])[0])
    tone = np.sin(2 * np.pi * 1000.0 * np.arange(SR) / SR)
    energy = (sinc_conv(tone, bank) ** 2).sum(axis=1)
    in_band = next(i for i, (f1, f2) in enumerate(bank.band_edges) if f1 < 1000.0 < f2)
    out_band = next(i for i, (f1, f2) in enumerate(bank.band_edges) if f1 > 4000.0)
    ratio = float(energy[in_band] / energy[out_band])
    report(5, "front end", [
        (f"pre-emphasis inverse err {inverse_err:.1e}", inverse_err < 1e-9),
        (f"kernel symmetry err {symmetry:.1e}", symmetry < 1e-12),
        (f"w(0)={w0:.2f}", abs(w0 - 0.08) < 1e-12),
        (f"1 kHz tone in-band/out-of-band energy {ratio:.0f}x", ratio >= 10.0),
    ])


def test_criterion_6_metrics(report):
    exact, count = True, 0
    for seed, n, decimals in [(s, 30, 1) for s in range(20)] + [(100, 1000, 2), (101, 1000, None)]:
        bona, spoof = random_scores(np.random.default_rng(seed), n, 1.0, decimals)
        exact &= compute_eer(bona, spoof).eer == brute_rocch(bona, spoof)
        exact &= compute_eer(bona, spoof, "crossing").eer == brute_crossing(bona, spoof)
        exact &= compute_min_dcf(bona, spoof).min_dcf == brute_min_dcf(bona, spoof)
        count += 1
    invariant = True
    for seed in range(20):
        bona, spoof = map(np.array, random_scores(np.random.default_rng(seed), 50, 1.0, 1))
        for f in (np.exp, np.arctan, lambda v: 5.0 * v - 2.0):
            invariant &= compute_eer(f(bona), f(spoof)).eer == compute_eer(bona, spoof).eer
            invariant &= compute_min_dcf(f(bona), f(spoof)).min_dcf == compute_min_dcf(bona, spoof).min_dcf
    four = compute_eer([0.8, 0.4], [0.6, 0.2]).eer
    report(6, "metrics", [
        (f"EER and minDCF equal brute force on {count} instances (up to 1000 scores)", bool(exact)),
        ("monotone transforms leave both unchanged", bool(invariant)),
        (f"4-score EER {four}", four == 0.25),
    ])


def _pipeline(root: Path) -> tuple[float, str]:
    def run(*args):
        out = subprocess.run([sys.executable, "-m", "aasist3", *args], capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        return out.stdout

    start = time.perf_counter()
    data = root / "data"
    run("make-toy-data", "--out", str(data), "--n", "100", "--seed", "7")
    (root / "pocket.yaml").write_text(run("default-config", "--pocket"))
    run("train", "--config", str(root / "pocket.yaml"), "--data", str(data), "--out", str(root / "model.ckpt"))
    run("score", "--ckpt", str(root / "model.ckpt"), "--protocol", str(data / "protocol_eval.txt"),
        "--out", str(root / "scores.txt"))
    seconds = time.perf_counter() - start
    printed = run("eval", "--scores", str(root / "scores.txt"), "--protocol", str(data / "protocol_eval.txt"))
    return seconds, printed


def test_criterion_7_toy_pipeline(report, tmp_path):
    first, printed = _pipeline(tmp_path / "run1")
    second, _ = _pipeline(tmp_path / "run2")
    protocol = tmp_path / "run1" / "data" / "protocol_eval.txt"
    bona, spoof = split_by_label(read_scores(tmp_path / "run1" / "scores.txt"), parse_protocol(protocol))
    eer, eer_crossing = compute_eer(bona, spoof).eer, compute_eer(bona, spoof, "crossing").eer
    min_dcf = compute_min_dcf(bona, spoof).min_dcf
    identical = (tmp_path / "run1" / "scores.txt").read_bytes() == (tmp_path / "run2" / "scores.txt").read_bytes()
    epochs = len((tmp_path / "run1" / "model.ckpt.metrics.jsonl").read_text().splitlines())
    report(7, "toy pipeline", [
        (f"{epochs} epochs <= 15", epochs <= 15),
        (f"eval EER {100 * eer:.2f}% (crossing {100 * eer_crossing:.2f}%) <= 5%", eer <= 0.05 and eer_crossing <= 0.05),
        (f"minDCF {min_dcf:.4f} <= 0.3", min_dcf <= 0.3),
        (f"runtime {first:.0f} s and {second:.0f} s < 900 s", max(first, second) < 900),
        ("same-seed score files bit-identical", identical),
        (f"CLI reports {', '.join(printed.splitlines())}", printed.startswith("EER ")),
    ])


def test_criterion_8_inference_contract(report, tmp_path):
    model = Aasist3Model(pocket_model_config(seed=5))
    rng = np.random.default_rng(3)
    for p in (model.pe_t, model.pe_s, model.stack_node):
        p.data[...] = rng.normal(scale=0.1, size=p.shape)
    t = np.arange(8 * SR) / SR
    audio = 0.3 * np.sin(2 * np.pi * 300 * t) * (1 + 0.5 * np.sin(2 * np.pi * t)) + 0.02 * rng.normal(size=t.size)
    chunks = chunk_signal(pre_emphasis(audio))
    mean = float(np.mean([model.bonafide_probability(c)[0] for c in chunks]))
    chunk_err = abs(score_utterance(audio, model) - mean)

    save_checkpoint(model, tmp_path / "m.ckpt")
    loaded = load_checkpoint(tmp_path / "m.ckpt")
    batch = np.stack(chunks)
    logit_err = float(np.max(np.abs(loaded(batch).data - model(batch).data)))
    report(8, "inference contract", [
        (f"8 s score = mean of {len(chunks)} chunks (err {chunk_err:.1e})", len(chunks) == 3 and chunk_err < 1e-9),
        (f"checkpoint round trip logit err {logit_err:.1e}", logit_err < 1e-6),
    ])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
