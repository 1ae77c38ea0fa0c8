"""Word-level stand-in translators.

The heavy neural models the full recipe would train are out of scope;
what the surrounding machinery needs is anything satisfying the
TranslatorModel protocol: declared direction support plus deterministic
batch translation. Provided implementations:

* Lexicon / LexiconTranslator: an IBM-Model-1-style translation table
  trained with EM (uniform alignment prior, a null source word), decoded
  word-by-word via argmax with copy-through for unseen words;
* IdentityTranslator: copies input through, for plumbing tests;
* ExternalProcessTranslator: wraps any command that maps stdin sentences
  to stdout sentences one per line, so real models can be plugged in;
* RoutingTranslator: dispatches per direction over other models, with
  optional copy-through for untrained directions (an untrained lexicon
  and copy-through are the same thing, which is exactly how a stage-1
  system limps through directions it never saw).
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence, runtime_checkable

from .corpus import BitextCorpus
from .errors import EmptyCorpus, ExternalProcessError, UnsupportedDirection

NULL_WORD = "<null>"


@runtime_checkable
class TranslatorModel(Protocol):
    """Anything that can translate sentence batches for known directions."""

    model_id: str

    def supported_directions(self) -> frozenset[tuple[str, str]] | None:
        """Directions this model accepts, or None for "any direction"."""
        ...

    def translate_batch(self, sentences: Sequence[str], src: str,
                        tgt: str) -> list[str]:
        ...


def check_direction(model: TranslatorModel, src: str, tgt: str) -> None:
    supported = model.supported_directions()
    if supported is not None and (src, tgt) not in supported:
        raise UnsupportedDirection(src, tgt)


@dataclass(frozen=True)
class IdentityTranslator:
    directions: frozenset[tuple[str, str]] | None = None
    model_id: str = "identity"

    def supported_directions(self) -> frozenset[tuple[str, str]] | None:
        return self.directions

    def translate_batch(self, sentences: Sequence[str], src: str,
                        tgt: str) -> list[str]:
        check_direction(self, src, tgt)
        return list(sentences)


class Lexicon:
    """t(f|e): conditional probabilities of target words given source words.

    Rows (fixed source word, all target words) sum to 1 within 1e-9.
    The table is sparse: only co-occurring pairs get mass.
    """

    def __init__(self, src_lang: str, tgt_lang: str,
                 table: dict[str, dict[str, float]],
                 log_likelihoods: tuple[float, ...] = ()) -> None:
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.table = table
        self.log_likelihoods = tuple(log_likelihoods)
        self._check_rows()

    def _check_rows(self) -> None:
        for e, row in self.table.items():
            total = sum(row.values())
            if abs(total - 1.0) > 1e-9:
                raise AssertionError(
                    f"row {e!r} sums to {total!r}, expected 1 within 1e-9")

    @property
    def src_vocab(self) -> set[str]:
        return set(self.table) - {NULL_WORD}

    @property
    def tgt_vocab(self) -> set[str]:
        return {f for row in self.table.values() for f in row}

    def best_translation(self, word: str) -> str:
        """argmax_f t(f|word); ties pick the lexicographically smaller f;
        words without a table row copy through unchanged."""
        row = self.table.get(word)
        if not row:
            return word
        best_f, best_p = None, -1.0
        for f, p in row.items():
            if p > best_p or (p == best_p and f < best_f):
                best_f, best_p = f, p
        return best_f

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "src_lang": self.src_lang,
            "tgt_lang": self.tgt_lang,
            "null_word": NULL_WORD,
            "log_likelihoods": list(self.log_likelihoods),
            "table": {
                e: {f: float(f"{p:.12g}") for f, p in sorted(row.items())}
                for e, row in sorted(self.table.items())
            },
        }
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n",
                        encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {}
        for e, row in payload["table"].items():
            total = sum(row.values())
            # rounded probabilities drift; renormalize rows on load
            table[e] = {f: p / total for f, p in row.items()}
        return cls(payload["src_lang"], payload["tgt_lang"], table,
                   tuple(payload.get("log_likelihoods", ())))


def train_lexicon(corpus: BitextCorpus, iterations: int = 20) -> Lexicon:
    """EM for a source-to-target word translation table.

    Alignment prior is uniform over source positions plus a null word, so
    the E-step posterior for each target token is t(f|e) normalized over
    the candidate source tokens. Initialization is uniform over each
    source word's co-occurring target words. The per-iteration corpus
    log-likelihood (stored on the result) never decreases.
    """
    if len(corpus) == 0:
        raise EmptyCorpus(f"{corpus.name} has no pairs for EM")
    pairs = [(p.src.split() + [NULL_WORD], p.tgt.split())
             for p in corpus.pairs]

    support: dict[str, set[str]] = defaultdict(set)
    for src_words, tgt_words in pairs:
        for e in src_words:
            support[e].update(tgt_words)
    t: dict[str, dict[str, float]] = {
        e: {f: 1.0 / len(fs) for f in sorted(fs)}
        for e, fs in sorted(support.items())
    }

    log_likelihoods: list[float] = []
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = {e: defaultdict(float) for e in t}
        log_likelihood = 0.0
        for src_words, tgt_words in pairs:
            prior = 1.0 / len(src_words)
            for f in tgt_words:
                probs = [t[e].get(f, 0.0) for e in src_words]
                total = sum(probs)
                log_likelihood += math.log(prior * total)
                for e, p in zip(src_words, probs):
                    if p:
                        counts[e][f] += p / total
        for e, row in counts.items():
            norm = sum(row.values())
            t[e] = {f: c / norm for f, c in sorted(row.items())}
            assert abs(sum(t[e].values()) - 1.0) <= 1e-9, \
                f"row {e!r} failed to renormalize"
        log_likelihoods.append(log_likelihood)

    return Lexicon(corpus.src_lang, corpus.tgt_lang, t, tuple(log_likelihoods))


def lexicon_translate(lexicon: Lexicon, sentence: str) -> str:
    """Word-by-word argmax decode; order preserved, unknowns copied."""
    return " ".join(lexicon.best_translation(w) for w in sentence.split())


class LexiconTranslator:
    def __init__(self, lexicon: Lexicon, model_id: str | None = None) -> None:
        self.lexicon = lexicon
        self.model_id = model_id or (
            f"lexicon:{lexicon.src_lang}-{lexicon.tgt_lang}")

    def supported_directions(self) -> frozenset[tuple[str, str]]:
        return frozenset({(self.lexicon.src_lang, self.lexicon.tgt_lang)})

    def translate_batch(self, sentences: Sequence[str], src: str,
                        tgt: str) -> list[str]:
        check_direction(self, src, tgt)
        return [lexicon_translate(self.lexicon, s) for s in sentences]


class ExternalProcessTranslator:
    """One subprocess invocation per batch: sentences in on stdin, one per
    line, translations out on stdout, same count, same order."""

    def __init__(self, command: str) -> None:
        self.command = command
        self.argv = shlex.split(command)
        if not self.argv:
            raise ExternalProcessError("empty translator command")
        self.model_id = f"exec:{command}"

    def supported_directions(self) -> None:
        return None

    def translate_batch(self, sentences: Sequence[str], src: str,
                        tgt: str) -> list[str]:
        if not sentences:
            return []
        payload = "".join(s + "\n" for s in sentences)
        try:
            proc = subprocess.run(self.argv, input=payload, text=True,
                                  capture_output=True, check=False)
        except OSError as exc:
            raise ExternalProcessError(f"cannot run {self.command!r}: {exc}")
        if proc.returncode != 0:
            raise ExternalProcessError(
                f"{self.command!r} exited {proc.returncode}: "
                f"{proc.stderr.strip()[:200]}")
        lines = proc.stdout.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) != len(sentences):
            raise ExternalProcessError(
                f"{self.command!r} returned {len(lines)} lines for "
                f"{len(sentences)} inputs")
        return lines


class RoutingTranslator:
    """Per-direction dispatch over other TranslatorModels."""

    def __init__(self, routes: dict[tuple[str, str], TranslatorModel],
                 copy_unsupported: bool = False,
                 model_id: str = "router") -> None:
        self.routes = dict(routes)
        self.copy_unsupported = copy_unsupported
        self.model_id = model_id

    def supported_directions(self) -> frozenset[tuple[str, str]] | None:
        if self.copy_unsupported:
            return None
        return frozenset(self.routes)

    def translate_batch(self, sentences: Sequence[str], src: str,
                        tgt: str) -> list[str]:
        model = self.routes.get((src, tgt))
        if model is None:
            if self.copy_unsupported:
                return list(sentences)
            raise UnsupportedDirection(src, tgt)
        return model.translate_batch(sentences, src, tgt)


def load_translator(spec: str) -> TranslatorModel:
    """Model spec: a lexicon JSON path, or ``exec:<command>``."""
    if spec.startswith("exec:"):
        return ExternalProcessTranslator(spec[len("exec:"):])
    return LexiconTranslator(Lexicon.load(spec))
