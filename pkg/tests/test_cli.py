from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from nliforge.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from nliforge.corpus import Label, read_corpus, write_corpus
from nliforge.hub import AnnotationHub, VoteLog

from .conftest import make_corpus, make_example


def run_cli(*args: str) -> int:
    return main(list(args))


class TestExitCodes:
    def test_usage_error_is_1(self):
        assert run_cli("gen-premises") == EXIT_USAGE  # missing required --roster

    def test_unknown_command_is_1(self):
        assert run_cli("no-such-stage") == EXIT_USAGE

    def test_data_error_is_2(self, tmp_path):
        bad = tmp_path / "corpus.jsonl"
        bad.write_text("{not json}\n")
        assert run_cli("stats", str(bad)) == EXIT_DATA


class TestStats:
    def test_stats_table_and_json(self, tmp_path, capsys):
        corpus = make_corpus(
            {Label.ENTAILMENT: 354, Label.CONTRADICTION: 311, Label.NEUTRAL: 335}
        )
        path = tmp_path / "corpus.jsonl"
        write_corpus(corpus, path)
        json_path = tmp_path / "stats.json"
        assert run_cli("stats", str(path), "--json", str(json_path)) == EXIT_OK
        out = capsys.readouterr().out
        assert "35.4%" in out and "31.1%" in out and "33.5%" in out
        stats = json.loads(json_path.read_text())
        assert stats["total"] == 1000


class TestDependencyErrors:
    def test_gen_premises_missing_roster_names_prior_stage(self, tmp_path, capsys):
        code = run_cli(
            "gen-premises", "--roster", str(tmp_path / "roster.json"),
            "--out", str(tmp_path),
        )
        assert code == EXIT_DATA
        assert "discover-domains" in capsys.readouterr().err

    def test_gen_hypotheses_missing_premises(self, tmp_path, capsys):
        code = run_cli("gen-hypotheses", "--out", str(tmp_path))
        assert code == EXIT_DATA
        assert "gen-premises" in capsys.readouterr().err

    def test_assemble_missing_corpus(self, tmp_path, capsys):
        code = run_cli("assemble", "--out", str(tmp_path))
        assert code == EXIT_DATA
        assert "gen-hypotheses" in capsys.readouterr().err

    def test_ablate_split_missing_train(self, tmp_path, capsys):
        code = run_cli("ablate-split", "--out", str(tmp_path))
        assert code == EXIT_DATA
        assert "assemble" in capsys.readouterr().err


def run_pipeline(out: Path, seed: int = 5) -> None:
    assert run_cli(
        "discover-domains", "--n", "40", "--seed", str(seed), "--out", str(out),
        "--include", "quora", "--exclude", "weather reports",
    ) == EXIT_OK
    assert run_cli(
        "gen-premises", "--roster", str(out / "roster.json"), "--per-cell", "2",
        "--seed", str(seed), "--out", str(out),
    ) == EXIT_OK
    assert run_cli(
        "gen-hypotheses", "--seed", str(seed), "--out", str(out),
    ) == EXIT_OK
    assert run_cli(
        "assemble", "--holdout", "6", "--dev", "0.1", "--test", "0.1",
        "--seed", str(seed), "--out", str(out),
    ) == EXIT_OK
    assert run_cli(
        "ablate-split", "--sizes", "4,8", "--seed", str(seed), "--out", str(out),
    ) == EXIT_OK


class TestPipeline:
    def test_small_mock_pipeline_artifacts(self, tmp_path):
        out = tmp_path / "run"
        run_pipeline(out)
        for name in (
            "roster.json", "domain_tally.json", "discovered_triples.jsonl",
            "premises.jsonl", "premise_report.json",
            "examples.jsonl", "discards.jsonl", "labeling_report.json",
            "train.jsonl", "dev.jsonl", "test.jsonl", "human_holdout.jsonl",
            "balance_report.json", "ablation_manifest.json",
        ):
            assert (out / name).exists(), name
        for stage in ("discover-domains", "gen-premises", "gen-hypotheses",
                      "assemble", "ablate-split"):
            manifest = json.loads((out / f"manifest-{stage}.json").read_text())
            assert manifest["stage"] == stage
            assert "seed" in manifest and "outputs" in manifest

        splits = {
            name: read_corpus(out / f"{name}.jsonl")
            for name in ("train", "dev", "test", "human_holdout")
        }
        examples = read_corpus(out / "examples.jsonl")
        assert sum(len(s) for s in splits.values()) == len(examples)
        subset_small = read_corpus(out / "subset_0000004.jsonl")
        subset_large = read_corpus(out / "subset_0000008.jsonl")
        assert {ex.id for ex in subset_small} <= {ex.id for ex in subset_large}

    def test_manifest_chain_hashes_inputs(self, tmp_path):
        out = tmp_path / "run"
        run_pipeline(out)
        gen = json.loads((out / "manifest-gen-hypotheses.json").read_text())
        premises_manifest = json.loads((out / "manifest-gen-premises.json").read_text())
        assert gen["inputs"]["premises"] == premises_manifest["outputs"]["premises"]


class _ConfidentScorer(BaseHTTPRequestHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        # high entailment probability iff the texts share their last word
        same = body["premise"].split()[-1] == body["hypothesis"].split()[-1]
        p = 0.9 if same else 0.1
        response = json.dumps(
            {"entailment": p, "contradiction": (1 - p) / 2, "neutral": (1 - p) / 2}
        ).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(response)))
        self.end_headers()
        self.wfile.write(response)

    def log_message(self, *args):
        pass


@pytest.fixture
def scorer_url():
    server = HTTPServer(("127.0.0.1", 0), _ConfidentScorer)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/score"
    server.shutdown()


class TestEvalCommands:
    def test_eval_binary(self, tmp_path, scorer_url, capsys):
        task = tmp_path / "toy.tsv"
        rows = ["grounding\tgenerated_text\tlabel"]
        for i in range(6):
            consistent = i % 2 == 0
            claim = f"claim {'match' if consistent else 'differ'}"
            rows.append(f"ground match\t{claim}\t{1 if consistent else 0}")
        task.write_text("\n".join(rows) + "\n")
        code = run_cli(
            "eval", "--task", str(task), "--adapter", "binary01",
            "--scorer", scorer_url, "--json", str(tmp_path / "report.json"),
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "Avg" in out
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["results"][0]["auc"] == 1.0

    def test_eval_3way(self, tmp_path, scorer_url, capsys):
        corpus = [
            make_example(id=f"e{i}", label=Label.ENTAILMENT,
                         premise=f"P{i} same", hypothesis=f"H{i} same")
            for i in range(4)
        ]
        path = tmp_path / "test.jsonl"
        write_corpus(corpus, path)
        code = run_cli("eval-3way", "--corpus", str(path), "--scorer", scorer_url)
        assert code == EXIT_OK
        assert "accuracy 1.0000" in capsys.readouterr().out

    def test_ablate_with_factory_command(self, tmp_path, scorer_url, capsys):
        out = tmp_path / "run"
        out.mkdir()
        train = [
            make_example(id=f"t{i}", label=list(Label)[i % 3],
                         premise=f"P{i} same", hypothesis=f"H{i} same")
            for i in range(10)
        ]
        subset_paths = []
        for size in (4, 8):
            path = out / f"subset_{size:07d}.jsonl"
            write_corpus(train[:size], path)
            subset_paths.append({"size": size, "path": path.name})
        manifest = out / "ablation_manifest.json"
        manifest.write_text(json.dumps({"spec": {"sizes": [4, 8]}, "subsets": subset_paths}))
        eval_path = out / "eval.jsonl"
        write_corpus(train, eval_path)
        factory = f"{sys.executable} -c \"print({scorer_url!r})\""
        code = run_cli(
            "ablate", "--manifest", str(manifest), "--scorer-factory", factory,
            "--eval", f"toy={eval_path}", "--out", str(out),
        )
        assert code == EXIT_OK
        rows = json.loads((out / "ablation_curve.json").read_text())
        assert len(rows) == 2
        assert all(row["status"] == "ok" for row in rows)


class TestAgreementCommand:
    def test_offline_report_from_vote_log(self, tmp_path, capsys):
        corpus = [
            make_example(id=f"h{i}", label=Label.ENTAILMENT, premise=f"P{i}",
                         hypothesis=f"H{i}")
            for i in range(4)
        ]
        corpus_path = tmp_path / "holdout.jsonl"
        write_corpus(corpus, corpus_path)
        log_path = tmp_path / "votes.jsonl"
        hub = AnnotationHub(corpus, VoteLog(log_path))
        hub.create_session(["a", "b", "c"], session_id="study")
        for ex in corpus:
            for annotator in ("a", "b", "c"):
                hub.vote("study", ex.id, annotator, Label.ENTAILMENT)
        code = run_cli(
            "agreement", "--corpus", str(corpus_path), "--votes", str(log_path),
            "--json", str(tmp_path / "agreement.json"),
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "average kappa: 100.00%" in out
        report = json.loads((tmp_path / "agreement.json").read_text())
        assert report["n_unanimous"] == 4


class TestConfigFile:
    def test_toml_config_defaults(self, tmp_path):
        config = tmp_path / "pipeline.toml"
        config.write_text(
            "\n".join(
                (
                    f'output_dir = "{tmp_path / "out"}"',
                    "seed = 9",
                    "[backend]",
                    'kind = "mock"',
                    "[premises]",
                    "per_cell = 1",
                )
            )
        )
        code = run_cli(
            "--config", str(config), "gen-premises", "--roster", "default",
        )
        assert code == EXIT_OK
        premises = (tmp_path / "out" / "premises.jsonl").read_text().splitlines()
        assert len(premises) == 38 * 2  # per_cell 1 from the config file
