"""Stage-oriented command line: discover-domains, gen-premises,
gen-hypotheses, assemble, ablate-split, stats, annotate serve, agreement,
eval, eval-3way, ablate.

Each stage writes its artifacts plus a manifest (content hashes, config,
seed, counts) into the output directory, so reruns against the mock
backend are byte-identical and comparable. Configuration comes from an
optional TOML file; command-line flags win over the file.

Exit codes: 0 success, 1 usage, 2 data error, 3 transport/backend error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import click

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import assembly, discovery, evaluation, labeling, mockdata, premises
from .agreement import agreement_report, format_agreement
from .corpus import (
    CorpusError,
    LengthCategory,
    compute_stats,
    default_roster,
    format_stats,
    load_roster,
    read_corpus,
    save_roster,
    write_corpus,
)
from .gateway import Gateway, GatewayError, GatewayPolicy, HttpBackend, MockBackend
from .manifests import write_manifest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRANSPORT = 3


@dataclass
class BackendConfig:
    kind: str = "mock"  # "mock" or "http"
    endpoint: str = ""
    max_retries: int = 3
    backoff: tuple[float, ...] = (0.5, 1.0, 2.0)
    rate_limit: tuple[int, float] | None = (8, 1.0)
    timeout: float = 30.0
    concurrency: int = 4
    mock_malformed_rate: float = 0.0


@dataclass
class PipelineConfig:
    output_dir: Path = Path("out")
    seed: int = 0
    backend: BackendConfig = dataclass_field(default_factory=BackendConfig)
    discovery_n: int = discovery.DEFAULT_DISCOVERY_SAMPLES
    discovery_temperature: float = discovery.DEFAULT_DISCOVERY_TEMPERATURE
    per_cell: int = 5
    labeling_temperature: float = labeling.DEFAULT_LABELING_TEMPERATURE
    holdout: int = 500
    dev_fraction: float = 0.01
    test_fraction: float = 0.01
    ablation_sizes: tuple[int, ...] = assembly.DEFAULT_ABLATION_SIZES

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
        config = cls()
        config.output_dir = Path(raw.get("output_dir", config.output_dir))
        config.seed = int(raw.get("seed", config.seed))
        backend = raw.get("backend", {})
        config.backend.kind = backend.get("kind", config.backend.kind)
        config.backend.endpoint = backend.get("endpoint", config.backend.endpoint)
        config.backend.concurrency = int(backend.get("concurrency", config.backend.concurrency))
        config.backend.mock_malformed_rate = float(
            backend.get("mock_malformed_rate", config.backend.mock_malformed_rate)
        )
        policy = backend.get("policy", {})
        config.backend.max_retries = int(policy.get("max_retries", config.backend.max_retries))
        if "backoff" in policy:
            config.backend.backoff = tuple(float(b) for b in policy["backoff"])
        if "rate_limit" in policy:
            limit = policy["rate_limit"]
            config.backend.rate_limit = (int(limit[0]), float(limit[1]))
        config.backend.timeout = float(policy.get("timeout", config.backend.timeout))
        disc = raw.get("discovery", {})
        config.discovery_n = int(disc.get("n", config.discovery_n))
        config.discovery_temperature = float(
            disc.get("temperature", config.discovery_temperature)
        )
        config.per_cell = int(raw.get("premises", {}).get("per_cell", config.per_cell))
        config.labeling_temperature = float(
            raw.get("labeling", {}).get("temperature", config.labeling_temperature)
        )
        split = raw.get("split", {})
        config.holdout = int(split.get("holdout", config.holdout))
        config.dev_fraction = float(split.get("dev", config.dev_fraction))
        config.test_fraction = float(split.get("test", config.test_fraction))
        if "ablation" in raw and "sizes" in raw["ablation"]:
            config.ablation_sizes = tuple(int(s) for s in raw["ablation"]["sizes"])
        return config


def _policy(config: PipelineConfig) -> GatewayPolicy:
    return GatewayPolicy(
        max_retries=config.backend.max_retries,
        backoff=config.backend.backoff,
        rate_limit=config.backend.rate_limit,
        timeout=config.backend.timeout,
    )


def make_gateway(config: PipelineConfig, stage: str, audit_path: Path | None = None,
                 seed: int | None = None) -> Gateway:
    """Gateway for one stage; the mock backend gets a stage-appropriate
    fallback generator so the whole pipeline runs with no model. ``seed``
    (default: the pipeline seed) fully determines mock outputs."""
    policy = _policy(config)
    if config.backend.kind == "http":
        if not config.backend.endpoint:
            raise click.UsageError("backend.kind is 'http' but no endpoint is configured")
        backend = HttpBackend(config.backend.endpoint, timeout=config.backend.timeout)
    elif config.backend.kind == "mock":
        seeds = discovery.load_default_seeds()
        seed_names = tuple({s.domain for s in seeds})
        fallbacks = {
            "discovery": mockdata.discovery_generator(seed_domains=seed_names),
            "premises": mockdata.premise_generator(),
            "labeling": mockdata.labeler_generator(
                malformed_rate=config.backend.mock_malformed_rate
            ),
        }
        backend = MockBackend(
            fallback=fallbacks[stage],
            seed=config.seed if seed is None else seed,
        )
        # the mock is local and free: rate limiting and backoff only slow it down
        policy = GatewayPolicy(
            max_retries=policy.max_retries, backoff=(), rate_limit=None,
            timeout=policy.timeout,
        )
    else:
        raise click.UsageError(f"unknown backend kind {config.backend.kind!r}")
    return Gateway(
        backend,
        policy=policy,
        audit_path=audit_path,
        concurrency=config.backend.concurrency,
    )


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise CorpusError(
            f"missing dependency artifact {path}; run the {produced_by!r} stage first"
        )
    return path


def _out_dir(config: PipelineConfig, override: str | None) -> Path:
    out = Path(override) if override else config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "logs").mkdir(exist_ok=True)
    return out


def _resolve_roster(path_value: str, out: Path):
    if path_value == "default":
        return default_roster()
    return load_roster(_require(Path(path_value), produced_by="discover-domains"))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML configuration file; flags override it.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None) -> None:
    """Synthetic NLI corpus generation and evaluation pipeline."""
    ctx.obj = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()


@cli.command("discover-domains")
@click.option("--n", default=None, type=int, help="Completions to sample.")
@click.option("--temperature", default=None, type=float)
@click.option("--include", multiple=True, help="Domain names to add during curation.")
@click.option("--exclude", multiple=True, help="Domain names to drop during curation.")
@click.option("--seed", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def discover_domains_cmd(config: PipelineConfig, n, temperature, include, exclude, seed, out):
    """Sample new domain triples, tally the names, and curate a roster."""
    out_dir = _out_dir(config, out)
    n = n if n is not None else config.discovery_n
    temperature = temperature if temperature is not None else config.discovery_temperature
    base_seed = seed if seed is not None else config.seed
    gateway = make_gateway(config, "discovery",
                           audit_path=out_dir / "logs" / "discovery_audit.jsonl",
                           seed=base_seed)
    seeds = discovery.load_default_seeds()
    triples, failures = discovery.sample_domain_triples(
        gateway, n=n, temperature=temperature, seeds=seeds, base_seed=base_seed
    )
    tally = discovery.tally_domains(triples, [s.domain for s in seeds])
    roster = discovery.curate_roster(tally, include=list(include), exclude=list(exclude))

    triples_path = out_dir / "discovered_triples.jsonl"
    tally_path = out_dir / "domain_tally.json"
    roster_path = out_dir / "roster.json"
    discovery.write_triples(triples, triples_path)
    discovery.save_tally(tally, tally_path)
    save_roster(roster, roster_path)
    write_manifest(
        out_dir,
        "discover-domains",
        config={"n": n, "temperature": temperature, "include": list(include),
                "exclude": list(exclude)},
        seed=base_seed,
        inputs={},
        outputs={"triples": triples_path, "tally": tally_path, "roster": roster_path},
        counts={"sampled": n, "parsed": len(triples), "parse_failures": len(failures),
                "novel_domains": len(tally.novel), "roster": len(roster)},
    )
    click.echo(
        f"parsed {len(triples)}/{n} samples ({len(failures)} parse failures), "
        f"{len(tally.novel)} novel domains, roster size {len(roster)}"
    )


@cli.command("gen-premises")
@click.option("--roster", "roster_path", required=True,
              help="Roster JSON from discover-domains, or 'default'.")
@click.option("--per-cell", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--lengths", default="short,paragraph")
@click.option("--dedup/--no-dedup", default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def gen_premises_cmd(config: PipelineConfig, roster_path, per_cell, seed, lengths, dedup, out):
    """Generate premises balanced over the (domain x length) grid."""
    out_dir = _out_dir(config, out)
    roster = _resolve_roster(roster_path, out_dir)
    per_cell = per_cell if per_cell is not None else config.per_cell
    base_seed = seed if seed is not None else config.seed
    spec = premises.PremiseBatchSpec(
        roster=roster,
        per_cell=per_cell,
        lengths=tuple(LengthCategory.parse(l) for l in lengths.split(",")),
        seed=base_seed,
    )
    gateway = make_gateway(config, "premises",
                           audit_path=out_dir / "logs" / "premise_audit.jsonl",
                           seed=base_seed)
    batch, report = premises.generate_stratified(gateway, spec)
    removed = 0
    if dedup:
        batch, removed = premises.dedup_premises(batch)
    audit = premises.audit_lengths(batch)

    premises_path = out_dir / "premises.jsonl"
    report_path = out_dir / "premise_report.json"
    premises.write_premises(batch, premises_path)
    with open(report_path, "w", encoding="utf-8") as handle:
        json.dump(
            {"generation": report.to_dict(), "dedup_removed": removed,
             "length_audit": audit.to_dict()},
            handle, ensure_ascii=False, indent=2, sort_keys=True,
        )
        handle.write("\n")
    inputs = {} if roster_path == "default" else {"roster": Path(roster_path)}
    roster_name = "default" if roster_path == "default" else Path(roster_path).name
    write_manifest(
        out_dir,
        "gen-premises",
        config={"roster": roster_name, "per_cell": per_cell, "lengths": lengths,
                "dedup": dedup},
        seed=base_seed,
        inputs=inputs,
        outputs={"premises": premises_path, "report": report_path},
        counts={"premises": len(batch), "dedup_removed": removed,
                "shortfall_cells": len(report.shortfalls)},
    )
    message = f"generated {len(batch)} premises ({removed} duplicates removed)"
    if report.shortfalls:
        message += f"; {len(report.shortfalls)} cells short of quota"
    if audit.flagged:
        message += f"; length anomalies: {len(audit.anomalies)}"
    click.echo(message)


@cli.command("gen-hypotheses")
@click.option("--premises", "premises_path", default=None,
              help="Premise file from gen-premises (default: <out>/premises.jsonl).")
@click.option("--instruction", "instruction_path", type=click.Path(exists=True), default=None,
              help="File with the labeler instruction text.")
@click.option("--seed", default=None, type=int)
@click.option("--mock-malformed-rate", default=None, type=float,
              help="Plant a malformed-completion rate in the mock backend (dry runs only).")
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def gen_hypotheses_cmd(config: PipelineConfig, premises_path, instruction_path, seed,
                       mock_malformed_rate, out):
    """Attach one (hypothesis, label) completion to every premise."""
    out_dir = _out_dir(config, out)
    source = Path(premises_path) if premises_path else out_dir / "premises.jsonl"
    _require(source, produced_by="gen-premises")
    batch = premises.read_premises(source)
    instruction = labeling.DEFAULT_LABELER_INSTRUCTION
    if instruction_path:
        instruction = Path(instruction_path).read_text("utf-8")
    base_seed = seed if seed is not None else config.seed
    if mock_malformed_rate is not None:
        config.backend.mock_malformed_rate = mock_malformed_rate
    gateway = make_gateway(config, "labeling",
                           audit_path=out_dir / "logs" / "labeling_audit.jsonl",
                           seed=base_seed)
    result = labeling.label_premises(
        gateway, batch, instruction=instruction,
        temperature=config.labeling_temperature, base_seed=base_seed,
    )

    corpus_path = out_dir / "examples.jsonl"
    discards_path = out_dir / "discards.jsonl"
    report_path = out_dir / "labeling_report.json"
    write_corpus(result.examples, corpus_path)
    labeling.write_discards(result.outputs, discards_path)
    with open(report_path, "w", encoding="utf-8") as handle:
        json.dump(result.report_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
    write_manifest(
        out_dir,
        "gen-hypotheses",
        config={"premises": source.name, "temperature": config.labeling_temperature},
        seed=base_seed,
        inputs={"premises": source},
        outputs={"examples": corpus_path, "discards": discards_path, "report": report_path},
        counts={"premises": len(batch), "examples": len(result.examples),
                "discards": len(result.discards),
                "transport_failures": len(result.transport_failures)},
    )
    click.echo(
        f"labeled {len(result.examples)}/{len(batch)} premises "
        f"(discard rate {result.discard_rate:.2%})"
    )
    if result.warning:
        click.echo(f"warning: {result.warning}", err=True)


@cli.command("assemble")
@click.option("--corpus", "corpus_path", default=None,
              help="Labeled corpus (default: <out>/examples.jsonl).")
@click.option("--holdout", default=None, type=int)
@click.option("--dev", default=None, type=float)
@click.option("--test", default=None, type=float)
@click.option("--seed", default=None, type=int)
@click.option("--stratify-by", default="label")
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def assemble_cmd(config: PipelineConfig, corpus_path, holdout, dev, test, seed, stratify_by, out):
    """Carve the corpus into human_holdout/dev/test/train splits."""
    out_dir = _out_dir(config, out)
    source = Path(corpus_path) if corpus_path else out_dir / "examples.jsonl"
    _require(source, produced_by="gen-hypotheses")
    examples = read_corpus(source)
    spec = assembly.SplitSpec(
        holdout_count=holdout if holdout is not None else config.holdout,
        dev_fraction=dev if dev is not None else config.dev_fraction,
        test_fraction=test if test is not None else config.test_fraction,
        seed=seed if seed is not None else config.seed,
        stratify_by=tuple(stratify_by.split(",")),
    )
    assembled = assembly.assemble(examples, spec)
    balance = assembly.verify_balance(assembled)

    outputs = {}
    from .corpus import Split

    for split in (Split.TRAIN, Split.DEV, Split.TEST, Split.HUMAN_HOLDOUT):
        members = [ex for ex in assembled if ex.split is split]
        path = out_dir / f"{split.value}.jsonl"
        write_corpus(members, path)
        outputs[split.value] = path
    balance_path = out_dir / "balance_report.json"
    with open(balance_path, "w", encoding="utf-8") as handle:
        json.dump(balance.to_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
    outputs["balance"] = balance_path
    write_manifest(
        out_dir, "assemble",
        config=spec.to_dict(), seed=spec.seed,
        inputs={"corpus": source},
        outputs=outputs,
        counts={s.value: sum(1 for ex in assembled if ex.split is s)
                for s in (Split.TRAIN, Split.DEV, Split.TEST, Split.HUMAN_HOLDOUT)},
    )
    sizes = {s.value: sum(1 for ex in assembled if ex.split is s)
             for s in (Split.HUMAN_HOLDOUT, Split.DEV, Split.TEST, Split.TRAIN)}
    click.echo("split sizes: " + ", ".join(f"{k}={v}" for k, v in sizes.items()))
    if not balance.passed:
        click.echo(f"balance flags: {len(balance.flags)}", err=True)


@cli.command("ablate-split")
@click.option("--train", "train_path", default=None,
              help="Train split (default: <out>/train.jsonl).")
@click.option("--sizes", default=None, help="Comma-separated subset sizes.")
@click.option("--seed", default=None, type=int)
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def ablate_split_cmd(config: PipelineConfig, train_path, sizes, seed, out):
    """Write nested, label-stratified ablation subsets of the train split."""
    out_dir = _out_dir(config, out)
    source = Path(train_path) if train_path else out_dir / "train.jsonl"
    _require(source, produced_by="assemble")
    train = read_corpus(source)
    spec = assembly.AblationSpec(
        sizes=tuple(int(s) for s in sizes.split(",")) if sizes else config.ablation_sizes,
        seed=seed if seed is not None else config.seed,
    )
    subsets = assembly.subsample_nested(train, spec)
    outputs = {}
    listing = []
    for subset in subsets:
        path = out_dir / f"subset_{len(subset):07d}.jsonl"
        write_corpus(subset, path)
        outputs[f"subset_{len(subset)}"] = path
        listing.append({"size": len(subset), "path": path.name})
    ablation_manifest = out_dir / "ablation_manifest.json"
    with open(ablation_manifest, "w", encoding="utf-8") as handle:
        json.dump({"spec": spec.to_dict(), "subsets": listing}, handle,
                  ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
    outputs["ablation_manifest"] = ablation_manifest
    write_manifest(
        out_dir, "ablate-split",
        config=spec.to_dict(), seed=spec.seed,
        inputs={"train": source}, outputs=outputs,
        counts={"subsets": len(subsets)},
    )
    click.echo(f"wrote {len(subsets)} nested subsets: {[len(s) for s in subsets]}")


@cli.command("stats")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--json", "json_path", type=click.Path(), default=None,
              help="Also write machine-readable stats JSON here.")
def stats_cmd(corpus_path, json_path):
    """Print corpus statistics."""
    stats = compute_stats(read_corpus(corpus_path))
    click.echo(format_stats(stats))
    if json_path:
        with open(json_path, "w", encoding="utf-8") as handle:
            json.dump(stats.to_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")


@cli.group("annotate")
def annotate_group():
    """Human-annotation service commands."""


@annotate_group.command("serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Vote log for durable persistence and replay.")
def annotate_serve_cmd(corpus_path, host, port, log_path):
    """Serve the annotation hub over a holdout corpus."""
    from .hub import serve

    corpus = read_corpus(corpus_path)
    click.echo(f"serving {len(corpus)} examples on {host}:{port}")
    serve(corpus, host=host, port=port, log_path=log_path)


@cli.command("agreement")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--votes", "votes_path", required=True, type=click.Path(exists=True),
              help="Vote log written by the annotation hub.")
@click.option("--session", "session_id", default=None,
              help="Session id to report on (default: the only one in the log).")
@click.option("--json", "json_path", type=click.Path(), default=None)
def agreement_cmd(corpus_path, votes_path, session_id, json_path):
    """Offline agreement report from a hub vote log."""
    from .hub import AnnotationHub, VoteLog

    corpus = read_corpus(corpus_path)
    hub = AnnotationHub(corpus, VoteLog(votes_path))
    if not hub.sessions:
        raise CorpusError(f"no sessions found in {votes_path}")
    if session_id is None:
        if len(hub.sessions) > 1:
            raise CorpusError(
                f"multiple sessions in log ({sorted(hub.sessions)}); pass --session"
            )
        session_id = next(iter(hub.sessions))
    try:
        session = hub.sessions[session_id]
    except KeyError:
        raise CorpusError(f"unknown session {session_id!r}") from None
    report = agreement_report(session)
    click.echo(format_agreement(report))
    if json_path:
        with open(json_path, "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")


@cli.command("eval")
@click.option("--task", "task_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="Task file (tsv/csv/jsonl); repeatable.")
@click.option("--adapter", "adapter_name", default="generic")
@click.option("--scorer", "scorer_url", required=True, help="Scorer HTTP endpoint.")
@click.option("--batch-size", default=8, type=int)
@click.option("--max-grounding-words", default=None, type=int,
              help="Clip groundings to this many words (default: pass through).")
@click.option("--json", "json_path", type=click.Path(), default=None)
def eval_cmd(task_paths, adapter_name, scorer_url, batch_size, max_grounding_words,
             json_path):
    """Binary factual-consistency evaluation (ROC-AUC) on task files."""
    adapter = evaluation.get_adapter(adapter_name)
    tasks = {}
    for path in task_paths:
        instances = evaluation.ingest_true_task(path, adapter)
        tasks[Path(path).stem] = [
            evaluation.EvalInstance(
                grounding=i.grounding, claim=i.claim, consistent=i.consistent,
                task=Path(path).stem, id=i.id,
            )
            for i in instances
        ]
    scorer = evaluation.RemoteScorer(scorer_url, batch_size=batch_size)
    report = evaluation.evaluate_binary_suite(
        scorer, tasks, concurrency=batch_size, max_grounding_words=max_grounding_words,
    )
    click.echo(evaluation.format_report_table(report))
    if json_path:
        with open(json_path, "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")


@cli.command("eval-3way")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--scorer", "scorer_url", required=True)
@click.option("--batch-size", default=8, type=int)
def eval_3way_cmd(corpus_path, scorer_url, batch_size):
    """3-way accuracy of a scorer endpoint on an NLI test corpus."""
    corpus = read_corpus(corpus_path)
    scorer = evaluation.RemoteScorer(scorer_url, batch_size=batch_size)
    result = evaluation.evaluate_3way(scorer, corpus, concurrency=batch_size)
    click.echo(
        f"accuracy {result.accuracy:.4f} on {result.n_scored} examples "
        f"({result.n_excluded} excluded, {result.tie_count} ties)"
    )


@cli.command("ablate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True),
              help="ablation_manifest.json from ablate-split.")
@click.option("--scorer-factory", "factory_command", required=True,
              help="Command run per subset; prints a scorer endpoint URL.")
@click.option("--eval", "eval_specs", multiple=True, required=True,
              help="name=path of a 3-way eval corpus; repeatable.")
@click.option("--out", default=None, type=click.Path())
@click.pass_obj
def ablate_cmd(config: PipelineConfig, manifest_path, factory_command, eval_specs, out):
    """Learning-curve ablation over the nested subsets."""
    import shlex

    out_dir = _out_dir(config, out)
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    manifest_dir = Path(manifest_path).parent
    subsets = [read_corpus(manifest_dir / entry["path"]) for entry in manifest["subsets"]]
    eval_sets = {}
    for spec_str in eval_specs:
        name, _, path = spec_str.partition("=")
        if not path:
            raise click.UsageError(f"--eval must be name=path, got {spec_str!r}")
        eval_sets[name] = read_corpus(path)
    factory = evaluation.CommandScorerFactory(shlex.split(factory_command), out_dir)
    rows = evaluation.run_ablation(factory, subsets, eval_sets)
    click.echo(evaluation.format_ablation_table(rows))
    curve_path = out_dir / "ablation_curve.json"
    with open(curve_path, "w", encoding="utf-8") as handle:
        json.dump([row.to_dict() for row in rows], handle, indent=2, sort_keys=True)
        handle.write("\n")
    click.echo(f"wrote {curve_path}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except GatewayError as exc:
        click.echo(f"transport error: {exc}", err=True)
        return EXIT_TRANSPORT
    except (CorpusError, ValueError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    return EXIT_OK


def run() -> None:  # console-script entry point
    sys.exit(main())
