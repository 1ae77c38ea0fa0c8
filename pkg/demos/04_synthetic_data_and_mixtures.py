"""
Synthetic bitext and balanced training mixtures
===============================================

Two augmentation moves create data for directions that have none:
back-translation rebuilds the source side of an existing corpus, and
pivoting translates the English side of an eng-L corpus into a third
language. Stage-2 balancing then caps every matched old direction at
the size of the new-direction corpus it supports.
"""

import tempfile
from pathlib import Path

from mtkit import (
    BitextCorpus,
    LangCorpusSet,
    SentencePair,
    VocabConfig,
    backtranslate,
    build_stage2_mixture,
    export_mixture,
    make_balance_plan,
    pivot_synthesize,
    train_bpe,
)
from mtkit.toy import render, word_transforms
from mtkit.translator import IdentityTranslator

workdir = Path(tempfile.mkdtemp(prefix="mtkit-demo-"))
transforms = word_transforms(seed=0)

base = ["the child sees a river", "every farmer walks toward the village",
        "rain crosses the green field", "that bright moon runs far",
        "a young dog runs quickly", "the warm fire breaks slowly"]


def bitext(name, src, tgt, sentences):
    return BitextCorpus(
        name=name, src_lang=src, tgt_lang=tgt,
        pairs=tuple(SentencePair(render(s, transforms[src]),
                                 render(s, transforms[tgt]))
                    for s in sentences))


eng_xho = bitext("eng-xho", "eng", "xho", base)
eng_zul = bitext("eng-zul", "eng", "zul", base[:4])
xho_zul = bitext("xho-zul", "xho", "zul", base[:2])

# back-translation: the identity model stands in for a reverse system;
# the real target side is carried over byte-exactly
bt = backtranslate(eng_xho, IdentityTranslator())
print("back-translated corpus:", bt.name)
print("  src provenance:", bt.src_provenance)
print("  tgt provenance:", bt.tgt_provenance)

# pivoting: translate the English side of eng-zul into xho, keeping zul
pivot = pivot_synthesize(eng_zul, IdentityTranslator(), pivot_to="xho")
print("pivot corpus:", pivot.name, "covers", sorted(pivot.languages()))

# balance stage 2 around the genuine xho-zul corpus: its 2 pairs cap the
# matched old directions xho-eng and eng-zul
plan = make_balance_plan(["xho-zul"])
mixture = build_stage2_mixture([eng_xho, eng_zul], [xho_zul], plan, seed=9)
for label, count in sorted(mixture.direction_counts().items()):
    print(f"  {label:8s} {count}")

# export writes aligned tagged token files plus a sidecar of the counts
vocab = train_bpe(LangCorpusSet.from_bitexts([eng_xho, eng_zul, xho_zul]),
                  VocabConfig(vocab_size=120))
export = export_mixture(mixture, vocab, workdir / "mixture")
print("wrote", export.src_path)
print("first line:", export.src_path.read_text().splitlines()[0])
