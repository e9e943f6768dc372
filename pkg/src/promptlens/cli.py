"""Command-line driver: benchmark generation, detection, clarification,
sessions, ablations, evaluation, reporting, and server entry points."""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click

from . import session as sessions_mod
from .clarify import (
    ABLATION_LIBRARIES,
    DecodeParams,
    FewShotMode,
    ablation_shots,
    clarify as clarify_op,
    default_shots,
    fallback_clarify,
)
from .grammar import (
    GenerationConfig,
    GenerationError,
    LexiconError,
    TemplateError,
    default_lexicon,
    detect_ambiguity,
    generate_benchmark,
    load_benchmark,
    load_lexicon,
    save_benchmark,
    validate_benchmark,
)
from .grammar.detect import strip_decoration
from .metrics import ScoredItem, score_generations
from .t2i_eval import ExperimentReport, ImageStore, run_experiment


def _lexicon(path: str | None):
    return load_lexicon(path) if path else default_lexicon()


def _load_config(spec: str) -> GenerationConfig:
    path = Path(spec)
    if path.exists():
        return GenerationConfig.from_dict(json.loads(path.read_text("utf-8")))
    packaged = resources.files("promptlens").joinpath(f"data/configs/{spec}.json")
    if packaged.is_file():
        return GenerationConfig.from_dict(json.loads(packaged.read_text("utf-8")))
    raise click.ClickException(f"no such config file or named config: {spec!r}")


def _clients(mock: bool):
    if mock:
        from .mocks import make_mock_clients

        return make_mock_clients()
    from .clients import CompletionClient, ParaphraseClient, T2IClient, VQAClient

    return CompletionClient(), T2IClient(), VQAClient(), ParaphraseClient()


def _clarifier(kind: str, lexicon, mock: bool, shots=None):
    if kind == "oracle":
        return lambda p, m: fallback_clarify(p, m, lexicon)
    lm = _clients(mock)[0]
    return lambda p, m: clarify_op(p, m, shots or default_shots(m), lm, DecodeParams())


@click.group()
def main() -> None:
    """Ambiguous-prompt benchmark, clarification, and faithfulness toolkit."""


@main.command()
@click.option("--config", "config_spec", default="full", show_default=True,
              help="Config file path or packaged config name (full, small).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def generate(config_spec: str, seed: int, out_path: str, lexicon_path: str | None) -> None:
    """Generate a benchmark JSONL file."""
    try:
        lexicon = _lexicon(lexicon_path)
        benchmark = generate_benchmark(_load_config(config_spec), lexicon, seed)
        save_benchmark(benchmark, out_path)
    except (GenerationError, LexiconError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {len(benchmark.records)} records to {out_path}")


@main.command()
@click.option("--benchmark", "benchmark_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def validate(benchmark_path: str, lexicon_path: str | None) -> None:
    """Validate a benchmark file's structure, counts, and round-trips."""
    lexicon = _lexicon(lexicon_path)
    benchmark = load_benchmark(benchmark_path)
    problems = validate_benchmark(benchmark, lexicon)
    if problems:
        for problem in problems:
            click.echo(f"PROBLEM: {problem}", err=True)
        raise click.ClickException(f"{len(problems)} problems found")
    click.echo(f"ok: {len(benchmark.records)} records valid")


@main.command()
@click.option("--sentence", required=True)
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Print full match details.")
def detect(sentence: str, lexicon_path: str | None, as_json: bool) -> None:
    """Identify the ambiguity type of a sentence."""
    lexicon = _lexicon(lexicon_path)
    result = detect_ambiguity(sentence, lexicon)
    if result is None:
        click.echo("no ambiguity template matched", err=True)
        sys.exit(1)
    if as_json:
        click.echo(json.dumps({
            "ambiguity_type": result.ambiguity_type,
            "template_id": result.template_id,
            "bindings": result.bindings,
        }))
    else:
        click.echo(result.ambiguity_type)


@main.command("clarify")
@click.option("--sentence", required=True)
@click.option("--mode", default="one_question", show_default=True,
              type=click.Choice([m.value for m in FewShotMode]))
@click.option("--clarifier", default="oracle", show_default=True,
              type=click.Choice(["oracle", "model"]))
@click.option("--mock", is_flag=True, help="Use in-process mock endpoints.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def clarify_cmd(sentence: str, mode: str, clarifier: str, mock: bool,
                lexicon_path: str | None) -> None:
    """Generate clarifying questions or visual setups for one sentence."""
    lexicon = _lexicon(lexicon_path)
    fm = FewShotMode(mode)
    try:
        if clarifier == "oracle":
            result = fallback_clarify(sentence, fm, lexicon)
        else:
            detected = detect_ambiguity(sentence, lexicon)
            if detected is None:
                raise click.ClickException("sentence does not match any template")
            from .grammar import instantiate_template

            prompt = instantiate_template(detected.template_id, detected.bindings, lexicon)
            result = clarify_op(prompt, fm, default_shots(fm), _clients(mock)[0])
    except Exception as exc:
        if isinstance(exc, click.ClickException):
            raise
        raise click.ClickException(str(exc))
    for item in result.items:
        click.echo(item)


@main.group()
def session() -> None:
    """Human-in-the-loop disambiguation sessions."""


def _scripted_policy(answers_path: str):
    doc = json.loads(Path(answers_path).read_text("utf-8"))

    def policy(s: sessions_mod.Session):
        entry = doc.get(s.session_id)
        if entry is None:
            return sessions_mod.Skip()
        kind = entry.get("action")
        if kind == "answer":
            return sessions_mod.Answer(entry["text"])
        if kind == "select":
            return sessions_mod.Select(int(entry["index"]))
        return sessions_mod.Skip()

    return policy


def _interactive_policy():
    def policy(s: sessions_mod.Session):
        click.echo(f"\nPrompt: {s.record.prompt.text}")
        click.echo(f"Intention: {s.intention.setup_text}")
        for i, item in enumerate(s.clarification.items):
            click.echo(f"  [{i}] {item}")
        raw = click.prompt("answer text, s<idx> to select, or 'skip'", default="skip")
        if raw == "skip":
            return sessions_mod.Skip()
        if raw.startswith("s") and raw[1:].isdigit():
            return sessions_mod.Select(int(raw[1:]))
        return sessions_mod.Answer(raw)

    return policy


@session.command("run")
@click.option("--benchmark", "benchmark_path", required=True, type=click.Path(exists=True))
@click.option("--mode", default="one_question", show_default=True,
              type=click.Choice([m.value for m in FewShotMode]))
@click.option("--clarifier", default="oracle", show_default=True,
              type=click.Choice(["oracle", "model"]))
@click.option("--answers", default="auto", show_default=True,
              help="'auto', 'interactive', or a JSON answers file.")
@click.option("--out-dir", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Directory for per-session logs.")
@click.option("--limit", default=0, type=int, help="Only use the first N records.")
@click.option("--mock", is_flag=True, help="Use in-process mock endpoints.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def session_run(benchmark_path: str, mode: str, clarifier: str, answers: str,
                out_dir: str | None, limit: int, mock: bool,
                lexicon_path: str | None) -> None:
    """Run one session per (record, interpretation) pair over a benchmark."""
    lexicon = _lexicon(lexicon_path)
    benchmark = load_benchmark(benchmark_path)
    records = benchmark.records[:limit] if limit else benchmark.records
    fm = FewShotMode(mode)
    clarify_fn = _clarifier(clarifier, lexicon, mock)
    if answers == "auto":
        policy = sessions_mod.auto_policy
    elif answers == "interactive":
        policy = _interactive_policy()
    else:
        policy = _scripted_policy(answers)
    batch = sessions_mod.run_batch(records, fm, clarify_fn, policy)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for s in batch.sessions:
            sessions_mod.persist(s, out / f"{s.session_id}.jsonl")
    click.echo(
        f"sessions: {batch.total}  answered: {batch.count('answered')}  "
        f"selected: {batch.count('selected')}  skipped: {batch.count('skipped')}  "
        f"success: {batch.success_rate:.4f}"
    )
    items = []
    for s in batch.sessions:
        if not s.clarification.items:
            continue
        refs = (
            tuple(s.record.setups)
            if fm is FewShotMode.MULTI_SETUP
            else tuple(s.record.questions)
        )
        items.append(ScoredItem(tuple(s.clarification.items), refs,
                                s.record.prompt.ambiguity_type))
    if items:
        report = score_generations(items)
        click.echo(f"bleu: {report.bleu4:.4f}  rouge: {report.rouge1:.4f}")


@main.group()
def ablate() -> None:
    """Ablation studies over shots and sentence complexity."""


@ablate.command("shots")
@click.option("--benchmark", "benchmark_path", required=True, type=click.Path(exists=True))
@click.option("--type", "ambiguity_type", required=True,
              type=click.Choice(sorted(ABLATION_LIBRARIES)))
@click.option("--clarifier", default="model", show_default=True,
              type=click.Choice(["oracle", "model"]))
@click.option("--max-shots", default=6, show_default=True, type=click.IntRange(1, 6))
@click.option("--mock", is_flag=True, help="Use in-process mock endpoints.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def ablate_shots(benchmark_path: str, ambiguity_type: str, clarifier: str,
                 max_shots: int, mock: bool, lexicon_path: str | None) -> None:
    """Score one-question clarification with 1..N type-specific shots."""
    lexicon = _lexicon(lexicon_path)
    benchmark = load_benchmark(benchmark_path)
    records = [r for r in benchmark.records
               if r.prompt.ambiguity_type == ambiguity_type
               and not r.prompt.is_combination]
    if not records:
        raise click.ClickException(f"benchmark has no {ambiguity_type} records")
    click.echo("n_shots,bleu,rouge,n_items")
    for n_shots in range(1, max_shots + 1):
        shots = ablation_shots(ambiguity_type, n_shots)
        clarify_fn = _clarifier(clarifier, lexicon, mock, shots=shots)
        items = []
        for record in records:
            result = clarify_fn(record.prompt, FewShotMode.ONE_QUESTION)
            if not result.items:
                continue
            items.append(ScoredItem(tuple(result.items), tuple(record.questions),
                                    ambiguity_type))
        report = score_generations(items)
        click.echo(f"{n_shots},{report.bleu4:.4f},{report.rouge1:.4f},{report.n_items}")


@ablate.command("complexity")
@click.option("--benchmark", "benchmark_path", required=True, type=click.Path(exists=True))
@click.option("--clarifier", default="model", show_default=True,
              type=click.Choice(["oracle", "model"]))
@click.option("--mock", is_flag=True, help="Use in-process mock endpoints.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def ablate_complexity(benchmark_path: str, clarifier: str, mock: bool,
                      lexicon_path: str | None) -> None:
    """Compare clarification quality on simple prompts vs their complex forms."""
    lexicon = _lexicon(lexicon_path)
    benchmark = load_benchmark(benchmark_path)
    by_text = {r.prompt.text: r for r in benchmark.records
               if r.prompt.complexity == "simple"}
    pairs = []
    for record in benchmark.records:
        if record.prompt.complexity != "complex":
            continue
        stripped = strip_decoration(record.prompt.text, lexicon)
        if stripped and stripped in by_text:
            pairs.append((by_text[stripped], record))
    if not pairs:
        raise click.ClickException("no simple/complex pairs found in benchmark")
    clarify_fn = _clarifier(clarifier, lexicon, mock)
    click.echo("structure,bleu,rouge,n_items")
    for label, records in (("simple", [p[0] for p in pairs]),
                           ("complex", [p[1] for p in pairs])):
        items = []
        for record in records:
            result = clarify_fn(record.prompt, FewShotMode.ONE_QUESTION)
            if not result.items:
                continue
            items.append(ScoredItem(tuple(result.items), tuple(record.questions),
                                    record.prompt.ambiguity_type))
        report = score_generations(items)
        click.echo(f"{label},{report.bleu4:.4f},{report.rouge1:.4f},{report.n_items}")


@main.command("eval")
@click.option("--sessions", "sessions_dir", required=True, type=click.Path(exists=True))
@click.option("--conditions", default="ambiguous,disambiguated", show_default=True)
@click.option("--n-images", default=4, show_default=True, type=int)
@click.option("--store", "store_dir", default="promptlens-images", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--question-source", default="intention", show_default=True,
              type=click.Choice(["intention", "generated"]))
@click.option("--mock", is_flag=True, help="Use in-process mock endpoints.")
def eval_cmd(sessions_dir: str, conditions: str, n_images: int, store_dir: str,
             out_path: str, question_source: str, mock: bool) -> None:
    """Run the image-generation + VQA faithfulness experiment."""
    loaded = [sessions_mod.load(p) for p in sorted(Path(sessions_dir).glob("*.jsonl"))]
    if not loaded:
        raise click.ClickException(f"no session logs in {sessions_dir}")
    _, t2i, vqa, _ = _clients(mock)
    try:
        report = run_experiment(
            loaded,
            tuple(c.strip() for c in conditions.split(",") if c.strip()),
            t2i,
            vqa,
            n_images=n_images,
            store=ImageStore(store_dir),
            question_source=question_source,
        )
    except Exception as exc:
        raise click.ClickException(str(exc))
    Path(out_path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8"
    )
    for condition, agg in report.per_condition.items():
        click.echo(
            f"{condition}: mean_per_prompt={agg['mean_per_prompt']:.4f} "
            f"mean_per_image={agg['mean_per_image']:.4f} n={agg['n_items']}"
        )
    click.echo(f"wrote {out_path}")


@main.command("report")
@click.option("--report", "report_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", "out_dir", required=True, type=click.Path(file_okay=False))
def report_cmd(report_path: str, out_dir: str) -> None:
    """Render CSV tables and figures from an experiment report."""
    from .report import render_report

    doc = json.loads(Path(report_path).read_text("utf-8"))
    outputs = render_report(ExperimentReport.from_dict(doc), out_dir)
    for path in outputs:
        click.echo(str(path))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True, type=int)
@click.option("--data-dir", default="promptlens-data", show_default=True)
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def serve(host: str, port: int, data_dir: str, lexicon_path: str | None) -> None:
    """Run the HTTP service."""
    from .service import ApiConfig, serve as serve_app

    serve_app(ApiConfig(host=host, port=port, data_dir=data_dir), _lexicon(lexicon_path))


@main.command("mock-servers")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8399, show_default=True, type=int)
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True))
def mock_servers(host: str, port: int, lexicon_path: str | None) -> None:
    """Serve deterministic stub completion/t2i/vqa/paraphrase endpoints."""
    import uvicorn

    from .mocks import create_mock_app

    base = f"http://{host}:{port}"
    for env, route in (
        ("PROMPTLENS_LM_URL", "/complete"),
        ("PROMPTLENS_T2I_URL", "/t2i"),
        ("PROMPTLENS_VQA_URL", "/vqa"),
        ("PROMPTLENS_PARA_URL", "/paraphrase"),
    ):
        click.echo(f"{env}={base}{route}")
    uvicorn.run(create_mock_app(_lexicon(lexicon_path)), host=host, port=port,
                log_level="warning")


if __name__ == "__main__":
    main()
