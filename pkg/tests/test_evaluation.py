import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofdm_ood.dataset import DatasetSpec
from ofdm_ood.evaluation import (
    AurocGrid,
    EvaluationError,
    auroc,
    auroc_scores,
    evaluate_experiment,
    format_grid_csv,
    parse_grid_csv,
    report,
    roc,
)
from ofdm_ood.scores import ScoreTable, ScoreTableError, read_scores, write_scores

SIR = DatasetSpec().sir_db


def pairwise(id_scores, ood_scores):
    """P(ood > id) + 1/2 P(tie) by counting every pair."""
    total = 0.0
    for o in ood_scores:
        for i in id_scores:
            total += 1.0 if o > i else 0.5 if o == i else 0.0
    return total / (len(id_scores) * len(ood_scores))


def table(rng, n=8, shift=0.0, n_mod=4, sir=SIR, **meta):
    return ScoreTable(rng.normal(size=(n_mod, len(sir), n)) + shift, sir, meta)


# ---------------------------------------------------------------- ROC / AUROC

def test_perfect_separation():
    curve = roc([0, 0, 0], [1, 1, 1])
    assert (0.0, 1.0) in list(zip(curve.fpr.tolist(), curve.tpr.tolist()))
    assert auroc(curve) == 1.0


def test_identical_lists():
    x = [0.3, 1.2, -4.0, 2.2]
    assert auroc_scores(x, x) == 0.5


def test_small_pairwise_example():
    assert auroc_scores([1, 3], [2, 4]) == pytest.approx(0.75)


def test_curve_endpoints_and_counts():
    curve = roc([0.1, 0.5, 0.5], [0.5, 0.9])
    assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
    assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)
    assert (curve.n_id, curve.n_ood) == (3, 2)
    assert curve.thresholds[0] == np.inf


def test_empty_and_nonfinite_rejected():
    with pytest.raises(EvaluationError):
        roc([], [1.0])
    with pytest.raises(EvaluationError):
        roc([1.0], [])
    with pytest.raises(EvaluationError):
        roc([np.nan], [1.0])


def test_same_distribution_near_half():
    rng = np.random.default_rng(0)
    assert abs(auroc_scores(rng.normal(size=1024), rng.normal(size=1024)) - 0.5) <= 0.05


@pytest.mark.parametrize("seed", range(100))
def test_matches_pairwise_oracle(seed):
    rng = np.random.default_rng(seed)
    # small integer scores force plenty of ties
    a = rng.integers(0, 6, size=rng.integers(1, 15)).astype(float)
    b = rng.integers(0, 6, size=rng.integers(1, 15)).astype(float)
    assert abs(auroc_scores(a, b) - pairwise(a, b)) <= 1e-9


score_lists = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=30)


@given(score_lists, score_lists)
@settings(max_examples=200, deadline=None)
def test_curve_monotone_and_bounded(a, b):
    curve = roc(a, b)
    assert np.all(np.diff(curve.tpr) >= 0) and np.all(np.diff(curve.fpr) >= 0)
    assert 0.0 <= auroc(curve) <= 1.0


@given(score_lists, score_lists)
@settings(max_examples=200, deadline=None)
def test_swapping_classes_complements(a, b):
    assert auroc_scores(a, b) + auroc_scores(b, a) == pytest.approx(1.0, abs=1e-12)


@given(score_lists, score_lists, st.floats(0.1, 10), st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_invariant_to_monotone_transform(a, b, scale, offset):
    def f(v):
        return np.arctan(np.asarray(v) / 1e3) * scale + offset  # strictly increasing
    fa, fb = f(a), f(b)
    # only meaningful if the transform did not merge distinct values
    if len(set(fa.tolist()) | set(fb.tolist())) == len(set(a) | set(b)):
        assert auroc_scores(fa, fb) == pytest.approx(auroc_scores(a, b), abs=1e-12)


# ---------------------------------------------------------------- grids

def test_full_experiment_has_56_cells():
    rng = np.random.default_rng(1)
    grid = evaluate_experiment(table(rng, model="msp"), table(rng, shift=1.0, dataset="dsss"))
    assert grid.values.shape == (4, 14) and grid.n_cells == 56
    assert grid.metadata["model"] == "msp" and grid.metadata["dataset"] == "dsss"


def test_self_comparison_is_half():
    rng = np.random.default_rng(2)
    t = table(rng, n=64)
    grid = evaluate_experiment(t, t)
    assert np.all(np.abs(grid.values - 0.5) <= 0.05)


def test_cells_use_their_own_scores():
    rng = np.random.default_rng(3)
    din, dout = table(rng), table(rng)
    grid = evaluate_experiment(din, dout, keep_curves=True)
    for m, b in [(0, 0), (3, 13), (2, 7)]:
        assert grid.values[m, b] == pytest.approx(pairwise(din.cell(m, b), dout.cell(m, b)))
        assert grid.curves[(m, b)].n_id == 8


def test_missing_cell_reported_with_coordinates():
    rng = np.random.default_rng(4)
    with pytest.raises(EvaluationError, match=r"mod=3, sir_bin=0"):
        evaluate_experiment(table(rng), table(rng, n_mod=3))


def test_mismatched_sir_grids_rejected():
    rng = np.random.default_rng(5)
    other = tuple(s + 1 for s in SIR)
    with pytest.raises(EvaluationError, match="SIR"):
        evaluate_experiment(table(rng), table(rng, sir=other))


def test_grid_validation():
    with pytest.raises(EvaluationError):
        AurocGrid(np.zeros((0, 14)), SIR)
    with pytest.raises(EvaluationError):
        AurocGrid(np.full((4, 14), 1.5), SIR)
    with pytest.raises(EvaluationError):
        AurocGrid(np.zeros((4, 3)), SIR)


def test_weakest_bins_mean():
    values = np.tile(np.linspace(1.0, 0.35, 14), (4, 1))
    assert AurocGrid(values, SIR).weakest_bins_mean(5) == pytest.approx(values[0, -5:].mean())


def test_grid_csv_roundtrip():
    rng = np.random.default_rng(6)
    grid = AurocGrid(rng.uniform(size=(4, 14)), SIR, {"model": "vae", "oe": "True"})
    text = format_grid_csv(grid)
    lines = text.splitlines()
    assert lines[0] == "# model=vae"
    assert lines[2] == "modulation," + ",".join(f"{s:g}" for s in SIR)
    assert [ln.split(",")[0] for ln in lines[3:]] == ["BPSK", "QPSK", "QAM16", "QAM64"]
    back = parse_grid_csv(text)
    np.testing.assert_allclose(back.values, grid.values, atol=1e-9)
    assert back.sir_db == grid.sir_db and back.metadata == grid.metadata


def test_report_files(tmp_path):
    rng = np.random.default_rng(7)
    grid = evaluate_experiment(table(rng, model="ar"), table(rng, shift=2.0), keep_curves=True)
    paths = report(grid, tmp_path / "out")
    assert len(paths) == 1 + 56
    assert (tmp_path / "out" / "auroc_grid.csv").exists()
    roc_text = (tmp_path / "out" / "roc_QPSK_sir03.csv").read_text().splitlines()
    assert roc_text[1] == "# sir_db=9"
    assert roc_text[4] == "threshold,tpr,fpr"
    assert roc_text[5].startswith("inf,0.0,0.0")
    assert roc_text[-1].endswith(",1.0,1.0")
    assert report(grid, tmp_path / "bare", roc_points=False) == [str(tmp_path / "bare" / "auroc_grid.csv")]


# ---------------------------------------------------------------- score tables

def test_score_table_text_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    t = table(rng, n=5, model="dml", seed="3")
    write_scores(t, tmp_path / "s.csv")
    back = read_scores(tmp_path / "s.csv")
    assert back == t
    assert back.n_rows == 4 * 14 * 5
    assert back.cell(4, 0) is None


def _text(rows, sir="0.0,3.0"):
    return "# sir_db=" + sir + "\nmod,sir_bin,index,score\n" + "".join(r + "\n" for r in rows)


def test_score_table_errors():
    with pytest.raises(ScoreTableError, match="header"):
        ScoreTable.from_text("# sir_db=0.0\nm,s,i,v\n0,0,0,1.0\n")
    with pytest.raises(ScoreTableError, match="duplicate"):
        ScoreTable.from_text(_text(["0,0,0,1.0", "0,0,0,2.0", "0,1,0,1.0"]))
    with pytest.raises(ScoreTableError, match="missing row"):
        ScoreTable.from_text(_text(["0,0,0,1.0", "0,1,1,1.0"]))
    with pytest.raises(ScoreTableError, match="SIR"):
        ScoreTable.from_text(_text(["0,0,0,1.0"]))
    with pytest.raises(ScoreTableError, match="no score rows"):
        ScoreTable.from_text(_text([]))
    with pytest.raises(ScoreTableError, match="4 columns"):
        ScoreTable.from_text(_text(["0,0,0"]))
    with pytest.raises(ScoreTableError, match="missing sir_db"):
        ScoreTable.from_text("mod,sir_bin,index,score\n0,0,0,1.0\n")
