from __future__ import annotations

import io
import json

import numpy as np
import pytest

from conftest import clustered_corpus_and_store, synthetic_corpus, write_corpus
from kgcsg import (
    ConfigError,
    DataError,
    RunConfig,
    correlate_with_metrics,
    derive_cell_seed,
    load_metrics,
    pearson,
    run_csg,
    run_sweep,
    save_embeddings,
)
from kgcsg.reports import report_text
from kgcsg.spectral import CsgReport


def fake_report(dataset: str, csg_full: float) -> CsgReport:
    return CsgReport(csg_full=csg_full, parameters={"dataset": dataset})


def strip_wall(report: CsgReport) -> dict:
    params = {k: v for k, v in report.parameters.items() if k != "wall_ms"}
    return {"csg_full": report.csg_full, "csg_at": report.csg_at, "parameters": params}


class TestRunCsg:
    def test_determinism(self, tmp_path):
        rng = np.random.default_rng(0)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=8))
        config = RunConfig(triples=[path], hash_dim=8, m=6, k=4, seed=11)
        a, b = run_csg(config), run_csg(config)
        assert strip_wall(a) == strip_wall(b)
        assert json.dumps(strip_wall(a), sort_keys=True) == json.dumps(
            strip_wall(b), sort_keys=True
        )

    def test_far_separated_clusters_near_zero(self, tmp_path):
        text, store = clustered_corpus_and_store(n_classes=2, pairs_per_class=40)
        triples = write_corpus(tmp_path, text)
        emb = tmp_path / "clusters.emb"
        save_embeddings(store, emb)
        config = RunConfig(triples=[triples], embeddings_path=emb, m=20, k=10, seed=0)
        report = run_csg(config)
        assert report.csg_full <= 0.05

    def test_range_and_provenance(self, tmp_path):
        rng = np.random.default_rng(1)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=6))
        config = RunConfig(triples=[path], hash_dim=16, m=10, k=5, seed=7)
        report = run_csg(config)
        assert 0.0 <= report.csg_full <= 2.0 + 1e-8
        p = report.parameters
        assert p["m"] == 10 and p["k"] == 5 and p["seed"] == 7
        assert p["embedding_source"] == "hash" and p["embedding_dim"] == 16
        assert p["classes_used"] == p["c"]
        assert p["triple_count"] > 0 and p["pool_size"] > 0
        assert p["dataset"] == "corpus"

    def test_k_checked_before_compute(self, tmp_path):
        rng = np.random.default_rng(2)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=3, max_pairs=4))
        config = RunConfig(triples=[path], hash_dim=4, m=2, k=100, seed=0)
        with pytest.raises(ConfigError, match="exceeds pool size"):
            run_csg(config)

    def test_stage_name_in_errors(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("onlyonefield\n", encoding="utf-8")
        with pytest.raises(DataError, match="parse:"):
            run_csg(RunConfig(triples=[bad], hash_dim=4))

    def test_embedding_source_exclusivity(self, tmp_path):
        with pytest.raises(ConfigError, match="exactly one embedding source"):
            run_csg(RunConfig(triples=[tmp_path / "x.tsv"]))
        with pytest.raises(ConfigError, match="exactly one embedding source"):
            run_csg(
                RunConfig(
                    triples=[tmp_path / "x.tsv"],
                    embeddings_path=tmp_path / "e",
                    hash_dim=4,
                )
            )

    def test_missing_token_in_embedding_file(self, tmp_path):
        path = write_corpus(tmp_path, "a\tr\tt1\nb\tr\tt2\n")
        emb = tmp_path / "partial.emb"
        emb.write_text("2 2\na 0.0 0.0\nr 1.0 1.0\n", encoding="utf-8")
        with pytest.raises(DataError, match="materialize: .*'b'"):
            run_csg(RunConfig(triples=[path], embeddings_path=emb, m=1, k=1))

    def test_no_symmetrize_records_imag(self, tmp_path):
        rng = np.random.default_rng(3)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=6))
        config = RunConfig(
            triples=[path], hash_dim=8, m=8, k=4, seed=1, symmetrize=False
        )
        report = run_csg(config)
        assert report.parameters["symmetrize"] is False
        assert report.parameters["max_imag"] >= 0.0

    def test_filters_applied(self, tmp_path):
        text = "a\tr\tt1\nb\tr\tt1\nc\tr\tt1\nd\tr\tt2\ne\tr\tt2\nf\tr\tt3\n"
        path = write_corpus(tmp_path, text)
        config = RunConfig(triples=[path], hash_dim=4, m=3, k=2, min_pairs=2)
        report = run_csg(config)
        assert report.parameters["classes_used"] == 2
        assert report.parameters["class_count"] == 3  # stats stay unfiltered

    def test_multiple_split_files_concatenated(self, tmp_path):
        p1 = write_corpus(tmp_path, "a\tr\tt1\nb\tr\tt2\n", "train.tsv")
        p2 = write_corpus(tmp_path, "c\tr\tt1\nd\tr\tt2\n", "valid.tsv")
        report = run_csg(RunConfig(triples=[p1, p2], hash_dim=4, m=2, k=1))
        assert report.parameters["triple_count"] == 4
        assert report.parameters["dataset"] == tmp_path.name  # common parent dir

    def test_include_self_changes_result_and_provenance(self, tmp_path):
        rng = np.random.default_rng(22)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=6, min_pairs=4))
        base = dict(triples=[path], hash_dim=8, m=5, k=3, seed=4)
        plain = run_csg(RunConfig(**base))
        with_self = run_csg(RunConfig(**base, include_self=True))
        assert with_self.parameters["include_self"] is True
        # a guaranteed intra-class hit per query inflates the diagonal
        assert with_self.csg_full != plain.csg_full

    def test_normalize_embeddings_recorded_and_applied(self, tmp_path):
        rng = np.random.default_rng(23)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=6, min_pairs=4))
        base = dict(triples=[path], hash_dim=8, m=5, k=3, seed=4)
        raw = run_csg(RunConfig(**base))
        normed = run_csg(RunConfig(**base, normalize_embeddings=True))
        assert normed.parameters["normalize_embeddings"] is True
        assert normed.csg_full != raw.csg_full

    def test_csg_range_over_random_pipelines(self, tmp_path):
        rng = np.random.default_rng(20)
        for trial in range(10):
            path = write_corpus(
                tmp_path,
                synthetic_corpus(rng, n_classes=int(rng.integers(3, 10))),
                f"range{trial}.tsv",
            )
            config = RunConfig(
                triples=[path],
                hash_dim=int(rng.integers(2, 20)),
                hash_seed=trial,
                m=int(rng.integers(2, 20)),
                k=2,
                seed=trial,
            )
            assert 0.0 <= run_csg(config).csg_full <= 2.0 + 1e-8

    def test_nations_defaults_when_provided(self):
        from conftest import require_dataset

        paths = require_dataset("nations")
        config = RunConfig(
            triples=paths, hash_dim=32, hash_seed=7, m=120, k=50, seed=7
        )
        report = run_csg(config)
        assert 0.0 <= report.csg_full <= 2.0 + 1e-8
        assert report.parameters["entity_count"] == 14
        assert report.parameters["relation_count"] == 55
        again = run_csg(config)
        assert strip_wall(report) == strip_wall(again)


class TestSweep:
    def test_single_cell_equals_run_csg(self, tmp_path):
        rng = np.random.default_rng(4)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=6))
        config = RunConfig(triples=[path], hash_dim=8, seed=5)
        grid = run_sweep(config, m_values=[7], k_values=[3])
        assert len(grid.cells) == 1
        cell = grid.cells[0]
        standalone = run_csg(
            RunConfig(
                triples=[path],
                hash_dim=8,
                m=7,
                k=3,
                seed=derive_cell_seed(5, 7, 3),
            )
        )
        assert cell.csg == standalone.csg_full

    def test_every_cell_reproducible_standalone(self, tmp_path):
        rng = np.random.default_rng(5)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=5, min_pairs=6, max_pairs=20))
        config = RunConfig(triples=[path], hash_dim=4, seed=42)
        grid = run_sweep(config, m_values=[3, 6], k_values=[2, 5])
        assert len(grid.cells) == 4
        for cell in grid.cells:
            assert cell.status == "ok"
            standalone = run_csg(
                RunConfig(
                    triples=[path],
                    hash_dim=4,
                    m=cell.m,
                    k=cell.k,
                    seed=derive_cell_seed(42, cell.m, cell.k),
                )
            )
            assert cell.csg == standalone.csg_full

    def test_infeasible_k_becomes_error_cell(self, tmp_path):
        path = write_corpus(tmp_path, "a\tr\tt1\nb\tr\tt1\nc\tr\tt2\nd\tr\tt2\n")
        config = RunConfig(triples=[path], hash_dim=4, seed=0)
        grid = run_sweep(config, m_values=[2], k_values=[2, 50])
        ok, bad = grid.cells
        assert ok.status == "ok" and ok.csg is not None
        assert bad.status == "k exceeds pool size 4" and bad.csg is None

    def test_cells_sorted_and_deduped(self, tmp_path):
        rng = np.random.default_rng(6)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=4))
        config = RunConfig(triples=[path], hash_dim=4, seed=0)
        grid = run_sweep(config, m_values=[5, 2, 5], k_values=[3, 1])
        assert grid.m_values == [2, 5] and grid.k_values == [1, 3]
        assert [(c.m, c.k) for c in grid.cells] == [(2, 1), (2, 3), (5, 1), (5, 3)]

    def test_empty_grid_rejected(self, tmp_path):
        config = RunConfig(triples=["x"], hash_dim=4)
        with pytest.raises(ConfigError, match="at least one"):
            run_sweep(config, m_values=[], k_values=[5])


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([(0, 0), (1, 1), (2, 2)]) == pytest.approx(1.0)

    def test_perfect_antilinear(self):
        assert pearson([(0, 1), (1, 0)]) == pytest.approx(-1.0)

    def test_zero_variance_undefined(self):
        assert pearson([(1, 5), (2, 5), (3, 5)]) is None
        assert pearson([(4, 1), (4, 2)]) is None

    def test_too_few_points(self):
        with pytest.raises(DataError, match="at least 2"):
            pearson([(1, 1)])

    def test_bounds_and_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            pts = [(float(x), float(y)) for x, y in rng.standard_normal((n, 2))]
            r = pearson(pts)
            if r is None:
                continue
            assert abs(r) <= 1.0 + 1e-12
            assert pearson([(y, x) for x, y in pts]) == pytest.approx(r, abs=1e-12)


class TestLoadMetrics:
    def test_basic(self):
        rows = load_metrics(io.StringIO("dataset,model,mrr\nnations,distmult,0.5\n"))
        assert rows[0].dataset == "nations" and rows[0].mrr == 0.5

    def test_bad_header(self):
        with pytest.raises(DataError, match="header"):
            load_metrics(io.StringIO("a,b,c\n"))

    def test_mrr_out_of_range_names_row(self):
        text = "dataset,model,mrr\nd1,m1,0.5\nd1,m2,1.5\n"
        with pytest.raises(DataError, match="row 3"):
            load_metrics(io.StringIO(text))

    def test_non_numeric_mrr(self):
        with pytest.raises(DataError, match="row 2"):
            load_metrics(io.StringIO("dataset,model,mrr\nd1,m1,high\n"))


class TestCorrelate:
    def metrics(self, text: str):
        return io.StringIO("dataset,model,mrr\n" + text)

    def test_unmatched_dataset_listed(self):
        reports = [fake_report("nations", 0.5)]
        with pytest.raises(DataError, match="'umls'.*known: nations"):
            correlate_with_metrics(reports, self.metrics("umls,m1,0.3\nnations,m1,0.2\n"))

    def test_exact_linear_per_model(self):
        reports = [fake_report(d, c) for d, c in [("d1", 0.1), ("d2", 0.2), ("d3", 0.3)]]
        text = (
            "d1,up,0.1\nd2,up,0.2\nd3,up,0.3\n"  # r = +1 with csg
            "d1,down,0.9\nd2,down,0.8\nd3,down,0.7\n"  # r = -1
        )
        out = correlate_with_metrics(reports, self.metrics(text))
        assert out.per_model["up"] == pytest.approx(1.0)
        assert out.per_model["down"] == pytest.approx(-1.0)
        assert out.mean_model_r == pytest.approx(0.0, abs=1e-12)
        assert len(out.points) == 6

    def test_single_point_model_undefined(self):
        reports = [fake_report("d1", 0.1), fake_report("d2", 0.2)]
        out = correlate_with_metrics(
            reports, self.metrics("d1,a,0.5\nd2,a,0.6\nd1,solo,0.4\n")
        )
        assert out.per_model["solo"] is None
        assert out.per_model["a"] is not None

    def test_duplicate_report_rejected(self):
        reports = [fake_report("d1", 0.1), fake_report("d1", 0.2)]
        with pytest.raises(DataError, match="duplicate"):
            correlate_with_metrics(reports, self.metrics("d1,m,0.5\nd1,n,0.2\n"))

    def test_pooled_and_per_dataset(self):
        reports = [fake_report("d1", 0.1), fake_report("d2", 0.4)]
        out = correlate_with_metrics(
            reports, self.metrics("d1,m1,0.2\nd1,m2,0.3\nd2,m1,0.9\nd2,m2,0.8\n")
        )
        assert set(out.per_dataset) == {"d1", "d2"}
        assert out.pooled_r is not None


class TestEmitters:
    def test_sweep_csv_shape(self, tmp_path):
        rng = np.random.default_rng(8)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=4))
        grid = run_sweep(
            RunConfig(triples=[path], hash_dim=4, seed=0), m_values=[2, 4], k_values=[1, 2]
        )
        lines = report_text(grid, "csv").strip().splitlines()
        assert lines[0] == "m,k,csg,pool_size,wall_ms,status"
        assert len(lines) == 5

    def test_csg_json_contains_config(self, tmp_path):
        rng = np.random.default_rng(9)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=4))
        report = run_csg(RunConfig(triples=[path], hash_dim=4, m=3, k=2, seed=1))
        obj = json.loads(report_text(report, "json"))
        for key in (
            "dataset",
            "m",
            "k",
            "seed",
            "normalize_embeddings",
            "include_self",
            "symmetrize",
            "min_pairs",
            "max_classes",
            "pool_size",
        ):
            assert key in obj["parameters"]

    def test_emit_deterministic_except_wall_time(self, tmp_path):
        rng = np.random.default_rng(10)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=5))
        config = RunConfig(triples=[path], hash_dim=4, m=3, k=2, seed=0)
        texts = []
        for _ in range(2):
            obj = json.loads(report_text(run_csg(config), "json"))
            obj["parameters"].pop("wall_ms")
            texts.append(json.dumps(obj, sort_keys=True))
        assert texts[0] == texts[1]

    def test_floats_round_trip_in_both_formats(self, tmp_path):
        rng = np.random.default_rng(11)
        path = write_corpus(tmp_path, synthetic_corpus(rng, n_classes=5))
        report = run_csg(RunConfig(triples=[path], hash_dim=8, m=4, k=3, seed=2))
        obj = json.loads(report_text(report, "json"))
        assert obj["csg_full"] == report.csg_full  # exact, not approximate
        rows = dict(
            line.split(",", 1) for line in report_text(report, "csv").splitlines()[1:]
        )
        assert float(rows["csg_full"]) == report.csg_full
        assert float(rows["param.wall_ms"]) == report.parameters["wall_ms"]

    def test_correlation_undefined_never_nan(self):
        reports = [fake_report("d1", 0.3), fake_report("d2", 0.3)]
        out = correlate_with_metrics(
            reports,
            io.StringIO("dataset,model,mrr\nd1,m,0.5\nd2,m,0.6\n"),
        )
        text = report_text(out, "json")
        assert "NaN" not in text and "nan" not in text
        assert '"undefined"' in text  # zero CSG variance
        csv_text = report_text(out, "csv")
        assert "undefined" in csv_text
