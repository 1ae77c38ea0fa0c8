"""Synthetic bitext: back-translation and pivot-based synthesis.

Both operations keep the genuine side byte-identical to its input and
mark the generated side as synthetic with the producing model's id, so
provenance stays auditable through any number of mixing steps.
"""

from __future__ import annotations

from typing import Sequence

from .corpus import BitextCorpus, Provenance, SentencePair
from .errors import BadPivot, LanguageMismatch
from .translator import TranslatorModel, check_direction

DEFAULT_BATCH_SIZE = 64


def _batched_translate(model: TranslatorModel, sentences: list[str],
                       src: str, tgt: str, batch_size: int) -> list[str]:
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    out: list[str] = []
    for i in range(0, len(sentences), batch_size):
        out.extend(model.translate_batch(sentences[i:i + batch_size], src, tgt))
    return out


def backtranslate(corpus: BitextCorpus, model: TranslatorModel,
                  batch_size: int = DEFAULT_BATCH_SIZE,
                  name: str | None = None) -> BitextCorpus:
    """Rebuild the source side by translating the target side backwards.

    For an input (A, B) corpus and a B->A model, output pair i is
    (model(B_i), B_i): a synthetic A side, the untouched real B side.
    """
    check_direction(model, corpus.tgt_lang, corpus.src_lang)
    tgt_side = corpus.tgt_sentences
    translated = _batched_translate(model, tgt_side, corpus.tgt_lang,
                                    corpus.src_lang, batch_size)
    pairs = tuple(SentencePair(src, tgt)
                  for src, tgt in zip(translated, tgt_side))
    return BitextCorpus(
        name=name or f"{corpus.name}-bt",
        src_lang=corpus.src_lang,
        tgt_lang=corpus.tgt_lang,
        pairs=pairs,
        src_provenance=Provenance("synthetic", model.model_id),
        tgt_provenance=corpus.tgt_provenance,
    )


def pivot_synthesize(corpus: BitextCorpus, model: TranslatorModel,
                     pivot_to: str,
                     batch_size: int = DEFAULT_BATCH_SIZE,
                     name: str | None = None) -> BitextCorpus:
    """Turn an English-L corpus into an X-L corpus by translating the
    English side to X. Output pair i is (model(eng_i), L_i); the L side
    stays byte-identical and real-if-it-was-real."""
    langs = corpus.languages()
    if "eng" not in langs:
        raise LanguageMismatch(f"{corpus.name} has no English side to pivot")
    other = next(iter(langs - {"eng"}))
    if pivot_to in langs:
        raise BadPivot(f"pivot target {pivot_to} already in {corpus.name}")
    check_direction(model, "eng", pivot_to)
    eng_side = corpus.side("eng")
    other_side = corpus.side(other)
    other_prov = (corpus.src_provenance if corpus.src_lang == other
                  else corpus.tgt_provenance)
    translated = _batched_translate(model, eng_side, "eng", pivot_to,
                                    batch_size)
    pairs = tuple(SentencePair(src, tgt)
                  for src, tgt in zip(translated, other_side))
    return BitextCorpus(
        name=name or f"{pivot_to}-{other}-pivot",
        src_lang=pivot_to,
        tgt_lang=other,
        pairs=pairs,
        src_provenance=Provenance("synthetic", model.model_id),
        tgt_provenance=other_prov,
    )


def mix_real_synthetic(real: Sequence[BitextCorpus],
                       synthetic: Sequence[BitextCorpus]
                       ) -> list[BitextCorpus]:
    """Combine same-direction real and synthetic corpora into one list,
    keeping each corpus (and its provenance) intact. Counts are additive;
    nothing is deduplicated or reweighted here."""
    combined = list(real) + list(synthetic)
    if not combined:
        return []
    direction = (combined[0].src_lang, combined[0].tgt_lang)
    for c in combined[1:]:
        if (c.src_lang, c.tgt_lang) != direction:
            raise LanguageMismatch(
                f"{c.name} is {c.src_lang}-{c.tgt_lang}, expected "
                f"{direction[0]}-{direction[1]}")
    return combined
