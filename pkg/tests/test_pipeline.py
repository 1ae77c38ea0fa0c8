"""Pipeline: config validation, full runs, determinism, failure handling."""

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from mtkit.corpus import BitextCorpus, SentencePair, write_bitext
from mtkit.errors import ConfigValidationError, StepFailure
from mtkit.pipeline import (
    STEPS,
    dev_bitext,
    load_config,
    load_multiparallel,
    run_pipeline,
    validate_config,
)
from mtkit.toy import WORDS, render, word_transforms

LANGS = ("eng", "ssw", "xho", "zul")
OLD_SIZES = {"xho": 120, "zul": 100, "ssw": 60}
NEW_SIZE = 50
DEV_SIZE = 25


def _sentences(n: int, rng: np.random.Generator) -> list[str]:
    seen: set[str] = set()
    while len(seen) < n:
        k = int(rng.integers(3, 7))
        seen.add(" ".join(WORDS[i] for i in rng.integers(0, 40, size=k)))
    return sorted(seen)


def _write_dataset(root: Path) -> dict:
    transforms = word_transforms(seed=0)
    rng = np.random.default_rng(7)
    total = DEV_SIZE + sum(OLD_SIZES.values()) + NEW_SIZE
    base = _sentences(total, rng)
    dev_base, rest = base[:DEV_SIZE], base[DEV_SIZE:]

    manifests = {}
    cursor = 0
    for lang, size in sorted(OLD_SIZES.items()):
        chunk = rest[cursor:cursor + size]
        cursor += size
        corpus = BitextCorpus(
            name=f"eng-{lang}", src_lang="eng", tgt_lang=lang,
            pairs=tuple(SentencePair(s, render(s, transforms[lang]))
                        for s in chunk))
        manifests[corpus.name] = write_bitext(corpus, root / "train")
    chunk = rest[cursor:cursor + NEW_SIZE]
    corpus = BitextCorpus(
        name="xho-zul", src_lang="xho", tgt_lang="zul",
        pairs=tuple(SentencePair(render(s, transforms["xho"]),
                                 render(s, transforms["zul"]))
                    for s in chunk))
    manifests[corpus.name] = write_bitext(corpus, root / "train")

    dev_dir = root / "dev"
    dev_dir.mkdir(parents=True)
    checksums = {}
    for lang in LANGS:
        payload = "".join(render(s, transforms[lang]) + "\n"
                          for s in dev_base).encode("utf-8")
        (dev_dir / f"dev.{lang}").write_bytes(payload)
        checksums[lang] = hashlib.sha256(payload).hexdigest()
    (dev_dir / "dev.json").write_text(json.dumps({
        "languages": list(LANGS), "pair_count": DEV_SIZE,
        "files": {lang: f"dev.{lang}" for lang in LANGS},
        "sha256": checksums}) + "\n", encoding="utf-8")

    return manifests


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("mini")
    manifests = _write_dataset(root)
    return root, manifests


def make_config(root: Path, manifests: dict, **overrides) -> dict:
    cfg = {
        "name": "mini",
        "seed": 11,
        "output_root": str(root / "out"),
        "corpora": [str(manifests[n]) for n in sorted(manifests)
                    if n.startswith("eng-")],
        "new_corpora": [str(manifests["xho-zul"])],
        "validation_split": 0,
        "vocab": {"vocab_size": 160},
        "stage1": {"em_iterations": [2, 5]},
        "stage2": {"em_iterations": 6},
        "eval": {"dev_dir": str(root / "dev")},
    }
    cfg.update(overrides)
    return cfg


# -- validation ----------------------------------------------------------


def test_valid_config_has_no_problems(dataset):
    root, manifests = dataset
    assert validate_config(make_config(root, manifests)) == []


@pytest.mark.parametrize("overrides,needle", [
    ({"seed": "7"}, "seed"),
    ({"name": ""}, "name"),
    ({"corpora": []}, "corpora"),
    ({"vocab": {"vocab_size": 160, "hrl_langs": ["eng", "zul"],
                "lrl_langs": ["zul"]}}, "vocab"),
    ({"vocab": {"nonsense": 3}}, "vocab"),
    ({"validation_split": -1}, "validation_split"),
    ({"stage1": {"em_iterations": []}}, "em_iterations"),
    ({"stage1": {"em_iterations": [3, 3]}}, "em_iterations"),
    ({"stage1": {"em_iterations": [0]}}, "em_iterations"),
    ({"backtranslation": {"default": "external"}}, "backtranslation"),
    ({"stage2": {"new_directions": ["eng-zul"]}}, "involves eng"),
    ({"stage2": {"new_directions": ["xho-qqq"]}}, "unknown language"),
    ({"stage2": {"new_directions": ["xhozul"]}}, "new_directions"),
    ({"stage2": {"plan": "/nowhere/plan.json"}}, "plan"),
    ({"eval": {"dev_dir": "/nowhere"}}, "dev.json"),
    ({"eval": {}}, "dev_dir"),
])
def test_validate_config_flags_problems(dataset, overrides, needle):
    root, manifests = dataset
    problems = validate_config(make_config(root, manifests, **overrides))
    assert any(needle in p for p in problems), problems


def test_validate_config_flags_missing_manifest(dataset):
    root, manifests = dataset
    cfg = make_config(root, manifests)
    cfg["corpora"] = cfg["corpora"] + [str(root / "absent.json")]
    assert any("missing manifest" in p for p in validate_config(cfg))


def test_validate_config_rejects_non_english_old_corpus(dataset):
    root, manifests = dataset
    cfg = make_config(root, manifests)
    cfg["corpora"] = [str(manifests["xho-zul"])]
    cfg["new_corpora"] = []
    problems = validate_config(cfg)
    assert any("English side" in p for p in problems)


def test_validate_config_requires_some_new_direction(dataset):
    root, manifests = dataset
    cfg = make_config(root, manifests, new_corpora=[])
    assert any("new direction" in p for p in validate_config(cfg))


def test_validate_config_checks_dev_language_coverage(dataset, tmp_path):
    root, manifests = dataset
    sparse = tmp_path / "dev"
    sparse.mkdir()
    (sparse / "dev.json").write_text(json.dumps({
        "languages": ["eng", "xho"], "pair_count": 1,
        "files": {}, "sha256": {}}), encoding="utf-8")
    cfg = make_config(root, manifests, eval={"dev_dir": str(sparse)})
    problems = validate_config(cfg)
    assert any("lacks languages" in p for p in problems)


def test_load_config_resolves_relative_paths(dataset, tmp_path):
    root, manifests = dataset
    cfg = make_config(root, manifests)
    cfg["corpora"] = ["train/eng-xho.json"]
    path = root / "cfg.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    loaded = load_config(path)
    assert loaded["corpora"][0] == str(manifests["eng-xho"])


def test_run_rejects_bad_config_without_side_effects(dataset, tmp_path):
    root, manifests = dataset
    cfg = make_config(root, manifests, seed="bad")
    run_dir = tmp_path / "never"
    with pytest.raises(ConfigValidationError):
        run_pipeline(cfg, run_dir=run_dir)
    assert not run_dir.exists()


# -- full runs -----------------------------------------------------------


@pytest.fixture(scope="module")
def finished_run(dataset, tmp_path_factory):
    root, manifests = dataset
    run_dir = tmp_path_factory.mktemp("runs") / "first"
    result = run_pipeline(make_config(root, manifests), run_dir=run_dir)
    return result


def test_run_completes_every_step(finished_run):
    log = json.loads((finished_run.run_dir / "run_log.json").read_text())
    assert log["status"] == "ok"
    assert [s["step"] for s in log["steps"]] == list(STEPS)
    assert all(s["status"] == "ok" for s in log["steps"])


def test_run_summary_reports_improvement(finished_run):
    summary = finished_run.summary
    assert summary["new_directions"] == ["xho-zul"]
    # 3 old corpora give 6 eng directions, plus the new one
    assert summary["directions_evaluated"] == 7
    assert summary["stage2_avg_bleu_new"] > summary["stage1_avg_bleu_new"]
    assert summary["improved"] is True


def test_run_writes_expected_artifacts(finished_run):
    run_dir = finished_run.run_dir
    for rel in (
        "config.json",
        "vocab/bpe.json", "vocab/obpe.json", "vocab/vocab_report.json",
        "stage1/mixture/stage1.src", "stage1/selection.json",
        "stage1/lexicons/eng-xho.json", "stage1/lexicons/zul-eng.json",
        "synth/bt/eng-xho-bt.json", "synth/pivot/xho-zul-pivot.json",
        "stage2/plan.json", "stage2/mixture/stage2.mixture.json",
        "stage2/lexicons/xho-zul.json",
        "eval/stage1_eval.json", "eval/stage2_eval.json",
        "eval/summary.json",
    ):
        assert (run_dir / rel).is_file(), rel


def test_log_checksums_match_files_on_disk(finished_run):
    run_dir = finished_run.run_dir
    log = json.loads((run_dir / "run_log.json").read_text())
    checked = 0
    for step in log["steps"]:
        for rel, digest in step["outputs"].items():
            path = run_dir / rel
            if path.is_file():
                actual = hashlib.sha256(path.read_bytes()).hexdigest()
                assert actual == digest, rel
                checked += 1
    assert checked >= 10


def test_selection_scores_cover_all_candidates(finished_run):
    doc = json.loads(
        (finished_run.run_dir / "stage1" / "selection.json").read_text())
    assert sorted(doc) == sorted(
        [f"eng-{l}" for l in OLD_SIZES] + [f"{l}-eng" for l in OLD_SIZES])
    for entry in doc.values():
        assert set(entry["dev_bleu"]) == {"em2", "em5"}
        assert entry["chosen"] in ("em2", "em5")


def test_rerun_is_byte_identical(dataset, finished_run, tmp_path):
    root, manifests = dataset
    second = run_pipeline(make_config(root, manifests),
                          run_dir=tmp_path / "second", threads=2)

    def digest(run_dir: Path) -> dict[str, str]:
        return {p.relative_to(run_dir).as_posix():
                hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(Path(run_dir).rglob("*"))
                if p.is_file() and p.name != "run_log.json"}

    assert digest(finished_run.run_dir) == digest(second.run_dir)


def test_rerun_log_identical_modulo_timestamps(dataset, finished_run,
                                               tmp_path):
    root, manifests = dataset
    second = run_pipeline(make_config(root, manifests),
                          run_dir=tmp_path / "again")

    def stripped(run_dir: Path) -> dict:
        log = json.loads((Path(run_dir) / "run_log.json").read_text())
        for step in log["steps"]:
            step.pop("started_at")
            step.pop("finished_at")
        return log

    assert stripped(finished_run.run_dir) == stripped(second.run_dir)


def test_run_dir_must_be_empty(dataset, finished_run):
    root, manifests = dataset
    with pytest.raises(ConfigValidationError, match="not empty"):
        run_pipeline(make_config(root, manifests),
                     run_dir=finished_run.run_dir)


def test_seed_changes_mixture_order(dataset, finished_run, tmp_path):
    root, manifests = dataset
    other = run_pipeline(make_config(root, manifests, seed=12),
                         run_dir=tmp_path / "reseeded")
    ours = (finished_run.run_dir / "stage1" / "mixture" / "stage1.src")
    theirs = Path(other.run_dir) / "stage1" / "mixture" / "stage1.src"
    a, b = ours.read_text(), theirs.read_text()
    assert a != b
    assert sorted(a.splitlines()) == sorted(b.splitlines())


# -- failures ------------------------------------------------------------


def test_step_failure_keeps_partial_outputs(dataset, tmp_path):
    root, manifests = dataset
    corrupt = tmp_path / "dev"
    corrupt.mkdir()
    doc = json.loads((root / "dev" / "dev.json").read_text())
    for lang in LANGS:
        (corrupt / f"dev.{lang}").write_bytes(
            (root / "dev" / f"dev.{lang}").read_bytes())
    doc["sha256"]["zul"] = "0" * 64
    (corrupt / "dev.json").write_text(json.dumps(doc), encoding="utf-8")

    cfg = make_config(root, manifests, eval={"dev_dir": str(corrupt)})
    run_dir = tmp_path / "failing"
    with pytest.raises(StepFailure) as excinfo:
        run_pipeline(cfg, run_dir=run_dir)
    assert excinfo.value.step == "model-selection"

    log = json.loads((run_dir / "run_log.json").read_text())
    assert log["status"] == "failed"
    failed = log["steps"][-1]
    assert failed["step"] == "model-selection"
    assert failed["status"] == "failed"
    assert "checksum" in failed["error"]
    # everything before the failing step is still on disk
    assert (run_dir / "vocab" / "obpe.json").is_file()
    assert (run_dir / "stage1" / "mixture" / "stage1.src").is_file()


# -- dev-set helpers ------------------------------------------------------


def test_load_multiparallel_rejects_bad_checksum(dataset, tmp_path):
    root, _ = dataset
    broken = tmp_path / "dev"
    broken.mkdir()
    for f in (root / "dev").iterdir():
        (broken / f.name).write_bytes(f.read_bytes())
    text = (broken / "dev.eng").read_text()
    (broken / "dev.eng").write_text(text + "extra line\n", encoding="utf-8")
    with pytest.raises(ConfigValidationError, match="checksum"):
        load_multiparallel(broken)


def test_dev_bitext_orients_any_language_pair(dataset):
    root, _ = dataset
    dev = load_multiparallel(root / "dev")
    corpus = dev_bitext(dev, "zul", "xho")
    assert corpus.src_lang == "zul"
    assert corpus.tgt_lang == "xho"
    assert len(corpus.pairs) == DEV_SIZE
    assert corpus.src_sentences == dev["zul"]
