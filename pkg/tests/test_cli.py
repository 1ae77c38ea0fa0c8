"""Command-line interface: each subcommand, output shapes, exit codes."""

import io
import json

import numpy as np
import pytest

from mtkit.cli import main
from mtkit.corpus import BitextCorpus, SentencePair, load_bitext, write_bitext
from mtkit.metrics import bleu
from mtkit.toy import WORDS, render, word_transforms


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    """Two English-centric corpora, one new pair, and a 3-way dev set."""
    root = tmp_path_factory.mktemp("clidata")
    transforms = word_transforms(seed=0)
    rng = np.random.default_rng(3)
    seen = set()
    while len(seen) < 170:
        k = int(rng.integers(3, 7))
        seen.add(" ".join(WORDS[i] for i in rng.integers(0, 30, size=k)))
    base = sorted(seen)

    manifests = {}
    slices = {"eng-xho": base[:70], "eng-zul": base[70:130],
              "xho-zul": base[130:150]}
    for name, chunk in slices.items():
        src, tgt = name.split("-")
        pairs = tuple(
            SentencePair(render(s, transforms[src]), render(s, transforms[tgt]))
            for s in chunk)
        corpus = BitextCorpus(name=name, src_lang=src, tgt_lang=tgt,
                              pairs=pairs)
        manifests[name] = write_bitext(corpus, root / "train")

    import hashlib
    dev_dir = root / "dev"
    dev_dir.mkdir()
    dev_base = base[150:]
    checksums = {}
    for lang in ("eng", "xho", "zul"):
        payload = "".join(render(s, transforms[lang]) + "\n"
                          for s in dev_base).encode("utf-8")
        (dev_dir / f"dev.{lang}").write_bytes(payload)
        checksums[lang] = hashlib.sha256(payload).hexdigest()
    (dev_dir / "dev.json").write_text(json.dumps({
        "languages": ["eng", "xho", "zul"], "pair_count": len(dev_base),
        "files": {lang: f"dev.{lang}" for lang in ("eng", "xho", "zul")},
        "sha256": checksums}) + "\n", encoding="utf-8")
    return root, manifests


@pytest.fixture(scope="module")
def vocab_file(data, tmp_path_factory):
    root, manifests = data
    out = tmp_path_factory.mktemp("clivocab") / "v.json"
    rc = main(["vocab", "train", "--mode", "bpe", "--vocab-size", "140",
               "--out", str(out)] + [str(p) for p in manifests.values()])
    assert rc == 0
    return out


def test_corpus_validate_and_stats(data, capsys):
    root, manifests = data
    assert main(["corpus", "validate", str(manifests["eng-xho"])]) == 0
    assert "ok eng-xho: 70 pairs" in capsys.readouterr().out
    assert main(["corpus", "stats", str(manifests["eng-zul"])]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["eng-zul"]["pair_count"] == 60


def test_corpus_validate_rejects_tampering(data, tmp_path, capsys):
    root, manifests = data
    src = manifests["eng-xho"]
    for f in src.parent.iterdir():
        if f.name.startswith("eng-xho"):
            (tmp_path / f.name).write_bytes(f.read_bytes())
    (tmp_path / "eng-xho.eng").write_text("tampered\n", encoding="utf-8")
    assert main(["corpus", "validate", str(tmp_path / "eng-xho.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_corpus_split_and_concat(data, tmp_path, capsys):
    root, manifests = data
    assert main(["corpus", "split", "--n", "10", "--out", str(tmp_path),
                 str(manifests["eng-xho"])]) == 0
    capsys.readouterr()
    valid = load_bitext(tmp_path / "eng-xho-valid.json")
    train = load_bitext(tmp_path / "eng-xho-train.json")
    assert (len(valid.pairs), len(train.pairs)) == (10, 60)

    assert main(["corpus", "concat", "--name", "joined", "--out",
                 str(tmp_path), str(tmp_path / "eng-xho-valid.json"),
                 str(tmp_path / "eng-xho-train.json")]) == 0
    capsys.readouterr()
    joined = load_bitext(tmp_path / "joined.json")
    assert len(joined.pairs) == 70


def test_vocab_encode_decode_round_trip(data, vocab_file, tmp_path,
                                        capsys, monkeypatch):
    root, manifests = data
    sentence = load_bitext(manifests["eng-xho"]).src_sentences[0]
    infile = tmp_path / "in.txt"
    infile.write_text(sentence + "\n", encoding="utf-8")
    assert main(["vocab", "encode", "--vocab", str(vocab_file),
                 "--in", str(infile)]) == 0
    ids = capsys.readouterr().out.strip()
    assert all(tok.isdigit() for tok in ids.split())

    monkeypatch.setattr("sys.stdin", io.StringIO(ids + "\n"))
    assert main(["vocab", "decode", "--vocab", str(vocab_file)]) == 0
    assert capsys.readouterr().out == sentence + "\n"


def test_vocab_report_prints_tables(data, vocab_file, tmp_path, capsys):
    root, manifests = data
    obpe = tmp_path / "obpe.json"
    assert main(["vocab", "train", "--mode", "obpe", "--vocab-size", "140",
                 "--p", "1.0", "--out", str(obpe),
                 str(manifests["eng-xho"]), str(manifests["eng-zul"])]) == 0
    capsys.readouterr()
    report = tmp_path / "report.json"
    assert main(["vocab-report", "--vocab-a", str(vocab_file),
                 "--vocab-b", str(obpe), "--out", str(report),
                 str(manifests["eng-xho"])]) == 0
    out = capsys.readouterr().out
    assert "change_%" in out
    assert "avg_tokens" in out
    doc = json.loads(report.read_text())
    assert {"representation", "avg_tokens", "tables"} <= set(doc)


def test_mixture_stage1_and_stage2(data, vocab_file, tmp_path, capsys):
    root, manifests = data
    mix1 = tmp_path / "mix1"
    assert main(["mixture", "stage1", "--seed", "17", "--vocab",
                 str(vocab_file), "--out", str(mix1),
                 str(manifests["eng-xho"]), str(manifests["eng-zul"])]) == 0
    capsys.readouterr()
    sidecar = json.loads((mix1 / "stage1.mixture.json").read_text())
    assert sidecar["total"] == 2 * (70 + 60)

    mix2 = tmp_path / "mix2"
    assert main(["mixture", "stage2", "--seed", "17", "--vocab",
                 str(vocab_file), "--out", str(mix2)]
                + [str(p) for p in manifests.values()]) == 0
    capsys.readouterr()
    sidecar = json.loads((mix2 / "stage2.mixture.json").read_text())
    # xho-zul (20) matches xho-eng and eng-zul at 20 each; the other two
    # old directions fall back to the only new size, 20
    assert sidecar["directions"]["xho-zul"] == 20
    assert sidecar["directions"]["xho-eng"] == 20
    assert sidecar["directions"]["eng-zul"] == 20
    assert sidecar["directions"]["eng-xho"] == 20
    assert sidecar["directions"]["zul-eng"] == 20


def test_translator_train_and_run(data, tmp_path, capsys):
    root, manifests = data
    lex = tmp_path / "lex.json"
    assert main(["translator", "train-lexicon", "--in",
                 str(manifests["eng-xho"]), "--iters", "8",
                 "--out", str(lex)]) == 0
    capsys.readouterr()

    infile = tmp_path / "in.txt"
    infile.write_text("the child\n", encoding="utf-8")
    assert main(["translator", "run", "--model", str(lex), "--src", "eng",
                 "--tgt", "xho", "--in", str(infile)]) == 0
    out = capsys.readouterr().out
    transforms = word_transforms(seed=0)
    assert out == render("the child", transforms["xho"]) + "\n"


def test_translator_run_exec_model(data, tmp_path, capsys):
    infile = tmp_path / "in.txt"
    infile.write_text("alpha beta\n", encoding="utf-8")
    assert main(["translator", "run", "--model", "exec:cat", "--src", "eng",
                 "--tgt", "zul", "--in", str(infile)]) == 0
    assert capsys.readouterr().out == "alpha beta\n"


def test_translator_run_wrong_direction_fails(data, tmp_path, capsys):
    root, manifests = data
    lex = tmp_path / "lex.json"
    main(["translator", "train-lexicon", "--in", str(manifests["eng-xho"]),
          "--iters", "2", "--out", str(lex)])
    capsys.readouterr()
    infile = tmp_path / "in.txt"
    infile.write_text("x\n", encoding="utf-8")
    assert main(["translator", "run", "--model", str(lex), "--src", "zul",
                 "--tgt", "eng", "--in", str(infile)]) == 2
    assert "error:" in capsys.readouterr().err


def test_synth_backtranslate_and_pivot(data, tmp_path, capsys):
    root, manifests = data
    lex = tmp_path / "xho-eng.json"
    corpus = load_bitext(manifests["eng-xho"])
    from mtkit.translator import train_lexicon
    flipped = BitextCorpus(
        name="xho-eng", src_lang="xho", tgt_lang="eng",
        pairs=tuple(SentencePair(p.tgt, p.src) for p in corpus.pairs))
    train_lexicon(flipped, iterations=8).save(lex)

    assert main(["synth", "backtranslate", "--model", str(lex),
                 "--in", str(manifests["eng-xho"]),
                 "--out", str(tmp_path / "bt")]) == 0
    capsys.readouterr()
    bt = load_bitext(tmp_path / "bt" / "eng-xho-bt.json")
    assert bt.src_provenance.kind == "synthetic"
    assert bt.tgt_sentences == corpus.tgt_sentences

    eng_zul = manifests["eng-zul"]
    lex2 = tmp_path / "eng-xho-lex.json"
    train_lexicon(corpus, iterations=8).save(lex2)
    assert main(["synth", "pivot", "--model", str(lex2), "--pivot-to", "xho",
                 "--in", str(eng_zul), "--out", str(tmp_path / "pv")]) == 0
    capsys.readouterr()
    pv = load_bitext(tmp_path / "pv" / "xho-zul-pivot.json")
    assert pv.languages() == frozenset({"xho", "zul"})


def test_eval_score_matches_library(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("the cat sat\nthe dog walked\n", encoding="utf-8")
    ref.write_text("the cat sat\nthe dog ran\n", encoding="utf-8")
    assert main(["eval", "score", "--metric", "bleu", "--hyp", str(hyp),
                 "--ref", str(ref)]) == 0
    printed = capsys.readouterr().out.strip()
    expected = bleu(["the cat sat", "the dog walked"],
                    ["the cat sat", "the dog ran"])
    assert printed == f"{expected:.2f}"


def test_eval_score_spbleu_requires_vocab(tmp_path, capsys):
    hyp = tmp_path / "f.txt"
    hyp.write_text("x\n", encoding="utf-8")
    assert main(["eval", "score", "--metric", "spbleu", "--hyp", str(hyp),
                 "--ref", str(hyp)]) == 2
    assert "--vocab" in capsys.readouterr().err


def test_eval_report_table_and_json(data, vocab_file, tmp_path, capsys):
    root, manifests = data
    tests_dir = tmp_path / "tests"
    tests_dir.mkdir()
    corpus = load_bitext(manifests["eng-xho"])
    write_bitext(corpus, tests_dir)
    report = tmp_path / "report.json"
    assert main(["eval", "report", "--model", "exec:cat", "--tests",
                 str(tests_dir), "--vocab", str(vocab_file),
                 "--out", str(report)]) == 0
    out = capsys.readouterr().out
    assert "direction" in out and "eng-xho" in out
    doc = json.loads(report.read_text())
    assert doc["rows"][0]["direction"] == "eng-xho"


def test_pipeline_validate_exit_codes(data, tmp_path, capsys):
    root, manifests = data
    cfg = {
        "name": "cli-mini", "seed": 5, "output_root": str(tmp_path / "out"),
        "corpora": [str(manifests["eng-xho"]), str(manifests["eng-zul"])],
        "new_corpora": [str(manifests["xho-zul"])],
        "vocab": {"vocab_size": 140},
        "stage1": {"em_iterations": [2, 4]},
        "stage2": {"em_iterations": 4},
        "eval": {"dev_dir": str(root / "dev")},
    }
    good = tmp_path / "good.json"
    good.write_text(json.dumps(cfg), encoding="utf-8")
    assert main(["pipeline", "validate", "--config", str(good)]) == 0
    assert "config ok" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    cfg_bad = dict(cfg)
    del cfg_bad["seed"]
    bad.write_text(json.dumps(cfg_bad), encoding="utf-8")
    assert main(["pipeline", "validate", "--config", str(bad)]) == 2
    assert "problem: seed" in capsys.readouterr().err


def test_pipeline_run_and_failure_exit_codes(data, tmp_path, capsys):
    root, manifests = data
    cfg = {
        "name": "cli-run", "seed": 5, "output_root": str(tmp_path / "out"),
        "corpora": [str(manifests["eng-xho"]), str(manifests["eng-zul"])],
        "new_corpora": [str(manifests["xho-zul"])],
        "vocab": {"vocab_size": 140},
        "stage1": {"em_iterations": [2, 4]},
        "stage2": {"em_iterations": 4},
        "eval": {"dev_dir": str(root / "dev")},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    assert main(["pipeline", "run", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "run dir:" in out and "improved: True" in out

    # same run dir again: config error, exit 2
    assert main(["pipeline", "run", "--config", str(path)]) == 2
    assert "not empty" in capsys.readouterr().err

    # corrupted dev checksum: the failure surfaces mid-run, exit 3
    broken_dev = tmp_path / "dev"
    broken_dev.mkdir()
    doc = json.loads((root / "dev" / "dev.json").read_text())
    for lang in ("eng", "xho", "zul"):
        (broken_dev / f"dev.{lang}").write_bytes(
            (root / "dev" / f"dev.{lang}").read_bytes())
    doc["sha256"]["eng"] = "1" * 64
    (broken_dev / "dev.json").write_text(json.dumps(doc), encoding="utf-8")
    cfg["eval"]["dev_dir"] = str(broken_dev)
    cfg["output_root"] = str(tmp_path / "out3")
    path.write_text(json.dumps(cfg), encoding="utf-8")
    assert main(["pipeline", "run", "--config", str(path)]) == 3
    assert "model-selection" in capsys.readouterr().err


def test_unknown_subcommand_exits_via_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["no-such-command"])
    assert excinfo.value.code == 2
