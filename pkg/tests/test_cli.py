import json
import re

import numpy as np
import pytest

from gaselect.cli import main
from gaselect.config import build_pipeline_config, parse_config_text
from gaselect.dataset import write_canonical
from gaselect.errors import ConfigError
from gaselect.pipeline import FULL, NESTED
from gaselect.synthetic import make_separable

FAST = ["--generations", "3", "--population", "6"]


@pytest.fixture
def colon_shaped_files(tmp_path):
    """Genes-by-samples matrix (2000 x 62) and signed label file, like the public release."""
    rng = np.random.default_rng(0)
    M = rng.uniform(5, 5000, size=(2000, 62))
    (tmp_path / "I2000.txt").write_text("\n".join(" ".join(f"{v:.3f}" for v in row) for row in M) + "\n")
    signs = rng.permutation([-1] * 40 + [1] * 22)
    (tmp_path / "tissues.txt").write_text("\n".join(str(s * (i + 1)) for i, s in enumerate(signs)) + "\n")
    return tmp_path / "I2000.txt", tmp_path / "tissues.txt"


@pytest.fixture
def dataset_csv(tmp_path):
    p = tmp_path / "sep.csv"
    write_canonical(make_separable(n_genes=8, seed=1), p)
    return p


def test_ingest_colon_layout(colon_shaped_files, tmp_path, capsys):
    m, l = colon_shaped_files
    out = tmp_path / "out"
    args = ["ingest", str(m), str(l), "--orientation", "genes-by-samples", "--out-dir", str(out)]
    assert main(args) == 0
    assert "62 samples, 2000 genes, 40 Tumor / 22 Normal" in capsys.readouterr().out
    first = (out / "dataset.csv").read_bytes()
    assert main(args) == 0
    assert (out / "dataset.csv").read_bytes() == first


def test_ingest_label_mismatch_exit_code(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("1 2\n3 4\n5 6\n")
    (tmp_path / "l.txt").write_text("-1\n2\n")
    code = main(["ingest", str(tmp_path / "m.txt"), str(tmp_path / "l.txt"), "--out-dir", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "AlignmentError" in err


def test_ingest_token_labels(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("1 2\n3 4\n")
    (tmp_path / "l.txt").write_text("tumor\nNormal\n")
    assert main(["ingest", str(tmp_path / "m.txt"), str(tmp_path / "l.txt"),
                 "--label-convention", "token", "-o", str(tmp_path / "d.csv")]) == 0
    assert (tmp_path / "d.csv").read_text().splitlines()[1].startswith("Tumor,")


def test_select_outputs_and_determinism(dataset_csv, tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["select", str(dataset_csv), "--seed", "5", "--out-dir", str(out)] + FAST) == 0
        outs.append(out)
    for f in ("selected_genes.txt", "ga_trace.csv", "selection.json"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    doc = json.loads((outs[0] / "selection.json").read_text())
    genes = (outs[0] / "selected_genes.txt").read_text().split()
    assert genes == doc["selected_gene_ids"] and len(genes) == doc["popcount"]
    assert doc["manifest"]["seed"] == 5
    assert len((outs[0] / "ga_trace.csv").read_text().splitlines()) == 4


def test_select_minimal_smoke(dataset_csv, tmp_path):
    out = tmp_path / "o"
    assert main(["select", str(dataset_csv), "--generations", "1", "--population", "2", "--out-dir", str(out)]) == 0
    assert (out / "selected_genes.txt").read_text().strip()


def test_evaluate_table_and_files(dataset_csv, tmp_path, capsys):
    out = tmp_path / "ev"
    assert main(["evaluate", str(dataset_csv), "--runs", "1", "--out-dir", str(out)] + FAST) == 0
    table = capsys.readouterr().out
    assert re.search(r"^SVM\s+93\.55%\s+2\s+\(paper-reported\)$", table, re.M)
    assert re.search(r"^Proposed GA\+MLP\s+99\.87%\s+2\s+\(paper-reported\)$", table, re.M)
    assert re.search(r"^MLP \(proposed\)\s+\d+\.\d\d%", table, re.M)
    report = json.loads((out / "report.json").read_text())
    assert report["schema"] == 1
    assert set(report["modes"]) == {FULL, NESTED}
    assert all(len(m["runs"]) == 1 for m in report["modes"].values())
    assert report["manifest"]["seed"] == 42
    assert len(report["manifest"]["inputs"]["dataset"]["sha256"]) == 64
    csv_lines = (out / "report.csv").read_text().splitlines()
    assert csv_lines[0].startswith("mode,run,seed") and len(csv_lines) == 3

    assert main(["report", str(out / "report.json")]) == 0
    assert capsys.readouterr().out == table


def test_evaluate_bias_mode_flag(dataset_csv, tmp_path):
    out = tmp_path / "ev"
    assert main(["evaluate", str(dataset_csv), "--runs", "2", "--bias-mode", "nested",
                 "--out-dir", str(out)] + FAST) == 0
    report = json.loads((out / "report.json").read_text())
    assert list(report["modes"]) == [NESTED]
    assert len(report["modes"][NESTED]["runs"]) == 2


def test_evaluate_byte_identical(dataset_csv, tmp_path, write):
    cfg = write("run.ini", "[pipeline]\nhidden_min = 3\nhidden_max = 4\n")
    docs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["evaluate", str(dataset_csv), "--runs", "2", "--config", str(cfg),
                     "--out-dir", str(out)] + FAST) == 0
        docs.append((out / "report.json").read_bytes())
    assert docs[0] == docs[1]


def test_bad_config_reports_key(dataset_csv, tmp_path, write, capsys):
    cfg = write("bad.ini", "[ga]\npopulaton_size = 5\n")
    assert main(["select", str(dataset_csv), "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
    assert "populaton_size" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["select", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)]) == 2


# -- config file ------------------------------------------------------------


def test_config_parsing_and_defaults():
    values = parse_config_text(
        "[ga]\npopulation_size = 30  # smaller\nmutation_rate = auto\n"
        "[mlp]\nlearning_rate = 0.2\n"
        "[pipeline]\nbias_mode = nested\nhidden_max = 9\n"
    )
    cfg = build_pipeline_config(values, seed=7)
    assert cfg.ga.population_size == 30 and cfg.ga.mutation_rate is None
    assert cfg.mlp_train.learning_rate == 0.2 and cfg.mlp_train.max_epochs == 60
    assert cfg.bias_modes == (NESTED,)
    assert cfg.hidden_sweep == (3, 9)
    assert cfg.seed == 7 and cfg.inner_folds == 3 and cfg.parsimony_weight == 0.01


def test_config_errors():
    with pytest.raises(ConfigError, match="learning_rate"):
        parse_config_text("[mlp]\nlearning_rate = fast\n")
    with pytest.raises(ConfigError, match="svm"):
        parse_config_text("[svm]\nc = 1\n")
    with pytest.raises(ConfigError):
        build_pipeline_config({}, bias_mode="sideways")


def test_shipped_default_config_matches_dataclass_defaults():
    from pathlib import Path

    from gaselect.config import load_config
    from gaselect.pipeline import PipelineConfig

    path = Path(__file__).resolve().parents[1] / "configs" / "default.ini"
    assert build_pipeline_config(load_config(path)) == PipelineConfig()
