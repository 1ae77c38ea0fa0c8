"""Declarative two-stage training pipeline.

One JSON config pins an entire experiment: corpora, vocabulary settings,
stage-1 candidate training, back-translation and pivot synthesis, the
balanced stage-2 mixture, and evaluation. `run_pipeline` executes the
steps in order into a single-writer run directory, records a run log
with input/output checksums per step, and leaves partial outputs in
place when a step fails.

Relative paths in a config file are resolved against the config file's
directory, so a config can travel with its data. Thread count is a
runtime argument, never part of the config: outputs are byte-identical
across thread counts and repeated runs (timestamps in the log aside).
"""

from __future__ import annotations

import hashlib
import json
import shutil
import time
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import (
    DEFAULT_LANGUAGES,
    BitextCorpus,
    SentencePair,
    concat_corpora,
    load_bitext,
    split_validation,
    validate_language,
    write_bitext,
)
from .dataset_builder import (
    BalancePlan,
    build_stage1_mixture,
    build_stage2_mixture,
    export_mixture,
    make_balance_plan,
    parse_direction,
)
from .errors import (
    ConfigValidationError,
    InvalidConfig,
    MTKitError,
    StepFailure,
)
from .metrics import bleu, evaluate_directions, select_best
from .synthesis import backtranslate, pivot_synthesize
from .translator import (
    LexiconTranslator,
    RoutingTranslator,
    TranslatorModel,
    load_translator,
    train_lexicon,
)
from .vocab import LangCorpusSet, VocabConfig, train_bpe, train_obpe
from .vocab_metrics import vocabulary_report

STEPS = (
    "validate",
    "split-validation",
    "vocab-train",
    "vocab-report",
    "stage1-train",
    "model-selection",
    "back-translation",
    "pivot-synthesis",
    "stage2-balance",
    "stage2-retrain",
    "final-eval",
)


# -- multiparallel dev sets ----------------------------------------------

def load_multiparallel(dev_dir: str | Path,
                       registry: Sequence[str] | None = None
                       ) -> dict[str, list[str]]:
    """Read an n-way parallel dev set: dev.json naming one aligned
    sentence file per language, checksums verified."""
    dev_dir = Path(dev_dir)
    manifest = json.loads((dev_dir / "dev.json").read_text(encoding="utf-8"))
    out: dict[str, list[str]] = {}
    for lang in manifest["languages"]:
        validate_language(lang, registry)
        path = dev_dir / manifest["files"][lang]
        payload = path.read_bytes()
        want = manifest["sha256"][lang]
        got = hashlib.sha256(payload).hexdigest()
        if got != want:
            raise ConfigValidationError(
                [f"{path.name}: checksum mismatch (expected {want[:12]}..., "
                 f"got {got[:12]}...)"])
        lines = payload.decode("utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) != manifest["pair_count"]:
            raise ConfigValidationError(
                [f"{path.name}: {len(lines)} lines, manifest says "
                 f"{manifest['pair_count']}"])
        if any(not line.strip() for line in lines):
            raise ConfigValidationError([f"{path.name}: empty line"])
        out[lang] = [unicodedata.normalize("NFC", line) for line in lines]
    return out


def dev_bitext(dev: dict[str, list[str]], src: str, tgt: str) -> BitextCorpus:
    return BitextCorpus(
        name=f"dev-{src}-{tgt}", src_lang=src, tgt_lang=tgt,
        pairs=tuple(SentencePair(a, b) for a, b in zip(dev[src], dev[tgt])))


def _flipped(corpus: BitextCorpus) -> BitextCorpus:
    return BitextCorpus(
        name=f"{corpus.name}-rev", src_lang=corpus.tgt_lang,
        tgt_lang=corpus.src_lang,
        pairs=tuple(SentencePair(p.tgt, p.src) for p in corpus.pairs),
        src_provenance=corpus.tgt_provenance,
        tgt_provenance=corpus.src_provenance)


def _oriented(corpus: BitextCorpus, src: str, tgt: str) -> BitextCorpus:
    if (corpus.src_lang, corpus.tgt_lang) == (src, tgt):
        return corpus
    if (corpus.tgt_lang, corpus.src_lang) == (src, tgt):
        return _flipped(corpus)
    raise MTKitError(f"{corpus.name} cannot serve direction {src}-{tgt}")


# -- configuration -------------------------------------------------------

def load_config(path: str | Path) -> dict:
    """Parse a config file and resolve its relative paths against the
    config file's own directory."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigValidationError(
            [f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"])
    if not isinstance(cfg, dict):
        raise ConfigValidationError([f"{path}: config must be a JSON object"])
    return _resolve_paths(cfg, path.parent)


def _resolve_paths(cfg: dict, base: Path) -> dict:
    cfg = json.loads(json.dumps(cfg))  # deep copy, JSON types only

    def resolve(p):
        return str((base / p).resolve()) if not Path(p).is_absolute() else p

    for key in ("corpora", "new_corpora"):
        if isinstance(cfg.get(key), list):
            cfg[key] = [resolve(p) if isinstance(p, str) else p
                        for p in cfg[key]]
    if isinstance(cfg.get("output_root"), str):
        cfg["output_root"] = resolve(cfg["output_root"])
    ev = cfg.get("eval")
    if isinstance(ev, dict) and isinstance(ev.get("dev_dir"), str):
        ev["dev_dir"] = resolve(ev["dev_dir"])
    s2 = cfg.get("stage2")
    if isinstance(s2, dict) and isinstance(s2.get("plan"), str):
        s2["plan"] = resolve(s2["plan"])
    return cfg


def _with_defaults(cfg: dict) -> dict:
    cfg = json.loads(json.dumps(cfg))
    seed = cfg.get("seed", 0)
    cfg.setdefault("new_corpora", [])
    cfg.setdefault("validation_split", 0)
    cfg.setdefault("vocab", {})
    cfg["vocab"].setdefault("use", "obpe")
    stage1 = cfg.setdefault("stage1", {})
    stage1.setdefault("seed", seed)
    stage1.setdefault("em_iterations", [5, 15])
    bt = cfg.setdefault("backtranslation", {})
    bt.setdefault("default", "internal")
    bt.setdefault("models", {})
    bt.setdefault("batch_size", 64)
    stage2 = cfg.setdefault("stage2", {})
    stage2.setdefault("plan", None)
    stage2.setdefault("seed", seed)
    stage2.setdefault("em_iterations", 20)
    stage2.setdefault("default_cap", None)
    stage2.setdefault("new_directions", None)
    cfg.setdefault("eval", {})
    cfg["eval"].setdefault("metric", "bleu")
    return cfg


def _manifest_langs(path: Path) -> tuple[str, str]:
    doc = json.loads(path.read_text(encoding="utf-8"))
    return doc["src_lang"], doc["tgt_lang"]


_VOCAB_FIELDS = ("vocab_size", "hrl_langs", "lrl_langs", "mean_exponent_p",
                 "special_tokens", "end_of_word_marker")


def _vocab_config(partial: dict) -> VocabConfig:
    """Build a VocabConfig from a pipeline config's vocab section: fields
    not given fall back to the VocabConfig defaults ('use' is handled by
    the caller and is not a VocabConfig field)."""
    fields = {k: v for k, v in partial.items() if k != "use"}
    unknown = sorted(set(fields) - set(_VOCAB_FIELDS))
    if unknown:
        raise InvalidConfig(f"unknown vocab fields: {unknown}")
    if "hrl_langs" in fields:
        fields["hrl_langs"] = frozenset(fields["hrl_langs"])
    if "lrl_langs" in fields:
        fields["lrl_langs"] = frozenset(fields["lrl_langs"])
    if "special_tokens" in fields:
        fields["special_tokens"] = tuple(fields["special_tokens"])
    return VocabConfig(**fields)


def validate_config(cfg: dict | str | Path,
                    registry: Sequence[str] | None = None) -> list[str]:
    """Schema, path-existence, and language-registry checks. Returns a
    list of problems, empty when the config is usable. No side effects."""
    try:
        cfg = load_config(cfg) if isinstance(cfg, (str, Path)) else cfg
    except ConfigValidationError as exc:
        return list(exc.problems)
    problems: list[str] = []
    registry = tuple(registry) if registry is not None else DEFAULT_LANGUAGES

    name = cfg.get("name")
    if not isinstance(name, str) or not name:
        problems.append("name: required non-empty string")
    if not isinstance(cfg.get("seed"), int):
        problems.append("seed: required integer (seeds must be explicit)")
    if not isinstance(cfg.get("output_root"), str):
        problems.append("output_root: required path string")

    corpora = cfg.get("corpora")
    if not isinstance(corpora, list) or not corpora:
        problems.append("corpora: required non-empty list of manifest paths")
        corpora = []
    new_corpora = cfg.get("new_corpora", [])
    if not isinstance(new_corpora, list):
        problems.append("new_corpora: must be a list of manifest paths")
        new_corpora = []

    seen_langs: set[str] = set()
    for key, paths in (("corpora", corpora), ("new_corpora", new_corpora)):
        for p in paths:
            if not isinstance(p, str):
                problems.append(f"{key}: entries must be path strings")
                continue
            path = Path(p)
            if not path.is_file():
                problems.append(f"{key}: missing manifest {p}")
                continue
            try:
                src, tgt = _manifest_langs(path)
            except (json.JSONDecodeError, KeyError) as exc:
                problems.append(f"{key}: unreadable manifest {p} ({exc})")
                continue
            for lang in (src, tgt):
                if lang not in registry:
                    problems.append(
                        f"{key}: {path.name}: unknown language {lang!r}")
                seen_langs.add(lang)
            if key == "corpora" and "eng" not in (src, tgt):
                problems.append(
                    f"corpora: {path.name} is {src}-{tgt}; stage-1 corpora "
                    f"need an English side")

    vocab_cfg = cfg.get("vocab", {})
    if not isinstance(vocab_cfg, dict):
        problems.append("vocab: must be an object")
    else:
        if vocab_cfg.get("use", "obpe") not in ("bpe", "obpe"):
            problems.append("vocab.use: must be 'bpe' or 'obpe'")
        try:
            _vocab_config(vocab_cfg)
        except (MTKitError, ValueError, TypeError) as exc:
            problems.append(f"vocab: {exc}")

    split = cfg.get("validation_split", 0)
    if not isinstance(split, int) or split < 0:
        problems.append("validation_split: must be a non-negative integer")

    stage1 = cfg.get("stage1", {})
    iters = stage1.get("em_iterations", [5, 15]) \
        if isinstance(stage1, dict) else None
    if (not isinstance(iters, list) or not iters
            or any(not isinstance(i, int) or i < 1 for i in iters)
            or len(set(iters)) != len(iters)):
        problems.append(
            "stage1.em_iterations: non-empty list of distinct positive ints")

    bt = cfg.get("backtranslation", {})
    if isinstance(bt, dict):
        if bt.get("default", "internal") not in ("internal", "none"):
            problems.append(
                "backtranslation.default: must be 'internal' or 'none'")
    else:
        problems.append("backtranslation: must be an object")

    stage2 = cfg.get("stage2", {})
    if isinstance(stage2, dict):
        plan = stage2.get("plan")
        if plan is not None and not Path(plan).is_file():
            problems.append(f"stage2.plan: missing file {plan}")
        directions = stage2.get("new_directions")
        if directions is None and not new_corpora:
            problems.append(
                "stage2: the run needs at least one new direction; give "
                "new_corpora or stage2.new_directions")
        if directions is not None:
            if not isinstance(directions, list) or not directions:
                problems.append(
                    "stage2.new_directions: must be a non-empty list")
                directions = []
            for label in directions:
                try:
                    d = parse_direction(str(label), "new")
                except ValueError as exc:
                    problems.append(f"stage2.new_directions: {exc}")
                    continue
                for lang in (d.src, d.tgt):
                    if lang not in registry:
                        problems.append(
                            f"stage2.new_directions: unknown language "
                            f"{lang!r} in {label}")
                if "eng" in (d.src, d.tgt):
                    problems.append(
                        f"stage2.new_directions: {label} involves eng; new "
                        f"directions are the non-English ones")
    else:
        problems.append("stage2: must be an object")

    ev = cfg.get("eval", {})
    dev_dir = ev.get("dev_dir") if isinstance(ev, dict) else None
    if not isinstance(dev_dir, str):
        problems.append("eval.dev_dir: required path string")
    elif not (Path(dev_dir) / "dev.json").is_file():
        problems.append(f"eval.dev_dir: no dev.json under {dev_dir}")
    else:
        try:
            dev_doc = json.loads(
                (Path(dev_dir) / "dev.json").read_text(encoding="utf-8"))
            dev_langs = set(dev_doc.get("languages", ()))
            missing = sorted(seen_langs - dev_langs)
            if missing:
                problems.append(
                    f"eval.dev_dir: dev set lacks languages {missing}")
        except json.JSONDecodeError as exc:
            problems.append(f"eval.dev_dir: unreadable dev.json ({exc})")
    if isinstance(ev, dict) and ev.get("metric", "bleu") != "bleu":
        problems.append("eval.metric: only 'bleu' is available")

    return problems


# -- run machinery -------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


@dataclass
class RunResult:
    run_dir: Path
    log_path: Path
    config: dict
    summary: dict


@dataclass
class _State:
    cfg: dict
    run_dir: Path
    threads: int
    registry: Sequence[str] | None
    old_train: list[BitextCorpus] = field(default_factory=list)
    new_real: list[BitextCorpus] = field(default_factory=list)
    vocab_bpe: object = None
    vocab_obpe: object = None
    vocab: object = None
    dev: dict[str, list[str]] | None = None
    candidates: dict[str, list[tuple[TranslatorModel, str]]] = \
        field(default_factory=dict)
    selected: dict[str, TranslatorModel] = field(default_factory=dict)
    old_pool: list[BitextCorpus] = field(default_factory=list)
    new_pool: dict[str, BitextCorpus] = field(default_factory=dict)
    new_labels: list[str] = field(default_factory=list)
    stage2_mixture: object = None
    stage2_models: dict[str, TranslatorModel] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def dev_set(self) -> dict[str, list[str]]:
        if self.dev is None:
            self.dev = load_multiparallel(self.cfg["eval"]["dev_dir"],
                                          self.registry)
        return self.dev

    def old_labels(self) -> list[str]:
        labels = []
        for c in self.old_train:
            labels += [f"{c.src_lang}-{c.tgt_lang}",
                       f"{c.tgt_lang}-{c.src_lang}"]
        return sorted(labels)


class _Runner:
    def __init__(self, cfg: dict, run_dir: Path, threads: int,
                 registry: Sequence[str] | None,
                 config_source: Path | None) -> None:
        self.state = _State(cfg, run_dir, threads, registry)
        self.config_source = config_source
        self.log_path = run_dir / "run_log.json"
        self.entries: list[dict] = []

    def _rel(self, path: Path) -> str:
        try:
            return path.relative_to(self.state.run_dir).as_posix()
        except ValueError:
            return path.name

    def _write_log(self, status: str) -> None:
        doc = {"name": self.state.cfg["name"], "status": status,
               "steps": self.entries}
        self.log_path.write_text(json.dumps(doc, indent=2) + "\n",
                                 encoding="utf-8")

    def run(self) -> RunResult:
        step_fns = {
            "validate": self.step_validate,
            "split-validation": self.step_split,
            "vocab-train": self.step_vocab_train,
            "vocab-report": self.step_vocab_report,
            "stage1-train": self.step_stage1_train,
            "model-selection": self.step_model_selection,
            "back-translation": self.step_backtranslation,
            "pivot-synthesis": self.step_pivot,
            "stage2-balance": self.step_stage2_balance,
            "stage2-retrain": self.step_stage2_retrain,
            "final-eval": self.step_final_eval,
        }
        for name in STEPS:
            started = _now()
            try:
                inputs, outputs = step_fns[name]()
            except Exception as exc:
                self.entries.append({
                    "step": name, "status": "failed", "error": str(exc),
                    "started_at": started, "finished_at": _now()})
                self._write_log("failed")
                raise StepFailure(name, exc) from exc
            self.entries.append({
                "step": name, "status": "ok",
                "started_at": started, "finished_at": _now(),
                "inputs": {self._rel(p): _sha256(p) for p in inputs},
                "outputs": {self._rel(p): _sha256(p) for p in outputs}})
            self._write_log("running")
        self._write_log("ok")
        return RunResult(self.state.run_dir, self.log_path,
                         self.state.cfg, self.state.summary)

    # -- steps ---------------------------------------------------------

    def step_validate(self):
        snapshot = self.state.run_dir / "config.json"
        if self.config_source is not None:
            shutil.copyfile(self.config_source, snapshot)
        else:
            snapshot.write_text(
                json.dumps(self.state.cfg, indent=2, sort_keys=True) + "\n",
                encoding="utf-8")
        inputs = [self.config_source] if self.config_source else []
        return inputs, [snapshot]

    def step_split(self):
        cfg, run_dir = self.state.cfg, self.state.run_dir
        out = run_dir / "corpora"
        n = cfg["validation_split"]
        inputs, outputs = [], []
        for manifest in cfg["corpora"]:
            inputs.append(Path(manifest))
            corpus = load_bitext(manifest, self.state.registry)
            if n:
                valid, train = split_validation(corpus, n)
                outputs.append(write_bitext(valid, out))
            else:
                train = corpus
            outputs.append(write_bitext(train, out))
            self.state.old_train.append(train)
        for manifest in cfg["new_corpora"]:
            inputs.append(Path(manifest))
            self.state.new_real.append(
                load_bitext(manifest, self.state.registry))
        labels = cfg["stage2"]["new_directions"]
        if labels is None:
            labels = [f"{c.src_lang}-{c.tgt_lang}" for c in self.state.new_real]
        self.state.new_labels = list(labels)
        return inputs, outputs

    def step_vocab_train(self):
        cfg = self.state.cfg
        data = LangCorpusSet.from_bitexts(
            self.state.old_train + self.state.new_real)
        vocab_cfg = _vocab_config(cfg["vocab"])
        out = self.state.run_dir / "vocab"
        out.mkdir(parents=True, exist_ok=True)
        self.state.vocab_bpe = train_bpe(data, vocab_cfg,
                                         threads=self.state.threads)
        self.state.vocab_obpe = train_obpe(data, vocab_cfg,
                                           threads=self.state.threads)
        bpe_path = self.state.vocab_bpe.save(out / "bpe.json")
        obpe_path = self.state.vocab_obpe.save(out / "obpe.json")
        self.state.vocab = (self.state.vocab_obpe
                            if cfg["vocab"]["use"] == "obpe"
                            else self.state.vocab_bpe)
        return [], [bpe_path, obpe_path]

    def step_vocab_report(self):
        out = self.state.run_dir / "vocab"
        doc = vocabulary_report(self.state.old_train + self.state.new_real,
                                self.state.vocab_bpe, self.state.vocab_obpe)
        path = out / "vocab_report.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        table_path = out / "vocab_report.txt"
        table_path.write_text(
            doc["tables"]["representation"] + "\n\n"
            + doc["tables"]["avg_tokens_a"] + "\n\n"
            + doc["tables"]["avg_tokens_b"] + "\n", encoding="utf-8")
        return [out / "bpe.json", out / "obpe.json"], [path, table_path]

    def step_stage1_train(self):
        cfg, state = self.state.cfg, self.state
        out = state.run_dir / "stage1"
        cand_dir = out / "candidates"
        cand_dir.mkdir(parents=True, exist_ok=True)
        outputs = []
        for corpus in state.old_train:
            for oriented in (corpus, _flipped(corpus)):
                label = f"{oriented.src_lang}-{oriented.tgt_lang}"
                state.candidates[label] = []
                for iters in cfg["stage1"]["em_iterations"]:
                    lexicon = train_lexicon(oriented, iterations=iters)
                    name = f"em{iters}"
                    outputs.append(
                        lexicon.save(cand_dir / f"{label}-{name}.json"))
                    state.candidates[label].append(
                        (LexiconTranslator(lexicon), name))
        mixture = build_stage1_mixture(state.old_train,
                                       seed=cfg["stage1"]["seed"])
        export = export_mixture(mixture, state.vocab, out / "mixture",
                                threads=state.threads)
        outputs += [export.src_path, export.tgt_path, export.sidecar_path]
        return [], outputs

    def step_model_selection(self):
        state = self.state
        dev = state.dev_set()
        out = state.run_dir / "stage1"
        selection: dict[str, dict] = {}
        outputs = []
        for label in state.old_labels():
            src, tgt = label.split("-")
            devset = dev_bitext(dev, src, tgt)
            candidates = state.candidates[label]
            chosen = select_best(candidates, devset)
            scores = {}
            for model, name in candidates:
                hyps = model.translate_batch(devset.src_sentences, src, tgt)
                scores[name] = round(bleu(hyps, devset.tgt_sentences), 4)
            selection[label] = {"chosen": chosen, "dev_bleu": scores}
            model = next(m for m, name in candidates if name == chosen)
            state.selected[label] = model
            lex_dir = out / "lexicons"
            lex_dir.mkdir(parents=True, exist_ok=True)
            outputs.append(model.lexicon.save(lex_dir / f"{label}.json"))
        path = out / "selection.json"
        path.write_text(json.dumps(selection, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return [], outputs + [path]


    def step_backtranslation(self):
        cfg, state = self.state.cfg, self.state
        bt_cfg = cfg["backtranslation"]
        out = state.run_dir / "synth" / "bt"
        outputs = []
        for corpus in state.old_train:
            label = f"{corpus.src_lang}-{corpus.tgt_lang}"
            spec = bt_cfg["models"].get(label, bt_cfg["default"])
            if spec == "none":
                state.old_pool.append(corpus)
                continue
            reverse_label = f"{corpus.tgt_lang}-{corpus.src_lang}"
            model = (state.selected[reverse_label] if spec == "internal"
                     else load_translator(spec))
            synthetic = backtranslate(corpus, model,
                                      batch_size=bt_cfg["batch_size"])
            outputs.append(write_bitext(synthetic, out))
            combined = concat_corpora(f"{label}-all", [corpus, synthetic])
            state.old_pool.append(combined)
        return [], outputs

    def step_pivot(self):
        state = self.state
        out = state.run_dir / "synth" / "pivot"
        outputs = []
        by_pair = {c.languages(): c for c in state.new_real}
        eng_train = {({c.src_lang, c.tgt_lang} - {"eng"}).pop(): c
                     for c in state.old_train}
        for label in state.new_labels:
            src, tgt = label.split("-")
            base = eng_train[tgt]
            model = state.selected[f"eng-{src}"]
            synthetic = pivot_synthesize(base, model, pivot_to=src)
            outputs.append(write_bitext(synthetic, out))
            real = by_pair.get(frozenset((src, tgt)))
            parts = ([_oriented(real, src, tgt)] if real else []) + [synthetic]
            state.new_pool[label] = concat_corpora(f"{label}-all", parts)
        return [], outputs

    def step_stage2_balance(self):
        cfg, state = self.state.cfg, self.state
        out = state.run_dir / "stage2"
        out.mkdir(parents=True, exist_ok=True)
        plan = (BalancePlan.load(cfg["stage2"]["plan"])
                if cfg["stage2"]["plan"]
                else make_balance_plan(state.new_labels))
        plan_path = plan.save(out / "plan.json")
        mixture = build_stage2_mixture(
            state.old_pool, list(state.new_pool.values()), plan,
            seed=cfg["stage2"]["seed"],
            default_cap=cfg["stage2"]["default_cap"])
        state.stage2_mixture = mixture
        export = export_mixture(mixture, state.vocab, out / "mixture",
                                threads=state.threads)
        return [], [plan_path, export.src_path, export.tgt_path,
                    export.sidecar_path]

    def step_stage2_retrain(self):
        cfg, state = self.state.cfg, self.state
        out = state.run_dir / "stage2" / "lexicons"
        out.mkdir(parents=True, exist_ok=True)
        outputs = []
        for label in state.new_labels:
            src, tgt = label.split("-")
            slices = [s for s in state.stage2_mixture.slices
                      if s.direction.role == "new"
                      and s.direction.label == label]
            pairs = [p for s in slices for p in s.oriented_pairs()]
            corpus = BitextCorpus(name=f"{label}-balanced", src_lang=src,
                                  tgt_lang=tgt, pairs=tuple(pairs))
            lexicon = train_lexicon(
                corpus, iterations=cfg["stage2"]["em_iterations"])
            outputs.append(lexicon.save(out / f"{label}.json"))
            state.stage2_models[label] = LexiconTranslator(lexicon)
        return [], outputs

    def step_final_eval(self):
        state = self.state
        dev = state.dev_set()
        out = state.run_dir / "eval"
        out.mkdir(parents=True, exist_ok=True)
        old_routes = {tuple(label.split("-")): model
                      for label, model in state.selected.items()}
        stage1_system = RoutingTranslator(old_routes, copy_unsupported=True,
                                          model_id="stage1")
        all_routes = dict(old_routes)
        all_routes.update({tuple(label.split("-")): model
                           for label, model in state.stage2_models.items()})
        stage2_system = RoutingTranslator(all_routes, copy_unsupported=True,
                                          model_id="stage2")
        labels = sorted(set(state.old_labels()) | set(state.new_labels))
        testsets = [dev_bitext(dev, *label.split("-")) for label in labels]

        outputs = []
        reports = {}
        for system in (stage1_system, stage2_system):
            report = evaluate_directions(system, testsets, state.vocab)
            reports[system.model_id] = report
            path = out / f"{system.model_id}_eval.json"
            path.write_text(json.dumps(report.to_json(), indent=2) + "\n",
                            encoding="utf-8")
            table = out / f"{system.model_id}_eval.txt"
            table.write_text(report.render_table() + "\n", encoding="utf-8")
            outputs += [path, table]

        new = state.new_labels
        before = reports["stage1"].average(new)
        after = reports["stage2"].average(new)
        state.summary = {
            "new_directions": sorted(new),
            "stage1_avg_bleu_new": round(before, 4),
            "stage2_avg_bleu_new": round(after, 4),
            "improved": after > before,
            "directions_evaluated": len(labels),
        }
        summary_path = out / "summary.json"
        summary_path.write_text(
            json.dumps(state.summary, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        return [], outputs + [summary_path]


def run_pipeline(config: dict | str | Path, threads: int = 1,
                 run_dir: str | Path | None = None,
                 registry: Sequence[str] | None = None) -> RunResult:
    """Validate the config, then execute every step into the run
    directory (default: output_root/name, which must not already hold a
    previous run). Raises ConfigValidationError before any work if the
    config is bad, StepFailure if a step fails; partial outputs and the
    run log stay on disk in the failure case."""
    config_source = Path(config) if isinstance(config, (str, Path)) else None
    cfg = load_config(config) if config_source else _resolve_paths(
        config, Path.cwd())
    problems = validate_config(cfg, registry)
    if problems:
        raise ConfigValidationError(problems)
    cfg = _with_defaults(cfg)

    run_dir = Path(run_dir) if run_dir is not None \
        else Path(cfg["output_root"]) / cfg["name"]
    if run_dir.exists() and any(run_dir.iterdir()):
        raise ConfigValidationError(
            [f"run directory {run_dir} already exists and is not empty"])
    run_dir.mkdir(parents=True, exist_ok=True)

    runner = _Runner(cfg, run_dir, threads, registry, config_source)
    return runner.run()
