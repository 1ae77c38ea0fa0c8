"""Aligned bitext corpora with provenance-tracking manifests.

A corpus is two plain-text files (one sentence per line, UTF-8, LF, no
BOM) plus a JSON manifest recording languages, per-side provenance, the
pair count, and per-file SHA-256 checksums. Text is NFC-normalized on
load and write, so a write/load round trip is bit-identical.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

from .errors import BadManifest, EmptyLine, MisalignedFiles

# Languages known out of the box; loaders accept any registry you pass.
DEFAULT_LANGUAGES: tuple[str, ...] = (
    "afr", "eng", "nso", "sna", "ssw", "tsn", "tso", "xho", "zul",
)

_CODE_RE = re.compile(r"^[a-z]{3}$")
_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")
# Characters that would break one-sentence-per-line storage.
_LINE_BREAKS = "\n\r\v\f\x85  "


def validate_language(code: str, registry: Iterable[str] | None = None) -> str:
    """Return *code* if it is a 3-letter lowercase code in *registry*."""
    if not _CODE_RE.match(code):
        raise BadManifest(f"bad language code {code!r}: want 3 lowercase letters")
    known = DEFAULT_LANGUAGES if registry is None else tuple(registry)
    if code not in known:
        raise BadManifest(f"language {code!r} not in registry {sorted(known)}")
    return code


@dataclass(frozen=True)
class Provenance:
    kind: Literal["real", "synthetic"]
    generator_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("real", "synthetic"):
            raise BadManifest(f"provenance kind {self.kind!r}")
        if (self.kind == "synthetic") != (self.generator_id is not None):
            raise BadManifest("generator_id is required iff kind is synthetic")

    def to_json(self) -> dict:
        if self.kind == "real":
            return {"kind": "real"}
        return {"kind": "synthetic", "generator_id": self.generator_id}

    @classmethod
    def from_json(cls, obj: object) -> "Provenance":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise BadManifest(f"bad provenance entry: {obj!r}")
        return cls(obj["kind"], obj.get("generator_id"))


REAL = Provenance("real")


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; both sides NFC, non-empty, single-line."""

    src: str
    tgt: str

    def __post_init__(self) -> None:
        for field in ("src", "tgt"):
            text = unicodedata.normalize("NFC", getattr(self, field))
            object.__setattr__(self, field, text)
            if not text.rstrip():
                raise ValueError(f"{field} side is empty after trimming")
            if any(ch in _LINE_BREAKS for ch in text):
                raise ValueError(f"{field} side contains a line break")


@dataclass(frozen=True)
class BitextCorpus:
    name: str
    src_lang: str
    tgt_lang: str
    pairs: tuple[SentencePair, ...]
    src_provenance: Provenance = REAL
    tgt_provenance: Provenance = REAL

    def __post_init__(self) -> None:
        if self.src_lang == self.tgt_lang:
            raise BadManifest(f"src_lang == tgt_lang ({self.src_lang})")
        if not _NAME_RE.match(self.name):
            raise BadManifest(f"corpus name {self.name!r} is not filesystem-safe")
        if not isinstance(self.pairs, tuple):
            object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def src_sentences(self) -> list[str]:
        return [p.src for p in self.pairs]

    @property
    def tgt_sentences(self) -> list[str]:
        return [p.tgt for p in self.pairs]

    def languages(self) -> frozenset[str]:
        return frozenset((self.src_lang, self.tgt_lang))

    def side(self, lang: str) -> list[str]:
        """Sentences of the given side, whichever orientation holds it."""
        if lang == self.src_lang:
            return self.src_sentences
        if lang == self.tgt_lang:
            return self.tgt_sentences
        raise KeyError(f"{self.name} has no {lang} side")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_lines(path: Path) -> list[str]:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise BadManifest(f"cannot read {path}: {exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadManifest(f"{path} is not valid UTF-8: {exc}") from exc
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def load_bitext(manifest_path: str | Path,
                registry: Iterable[str] | None = None) -> BitextCorpus:
    """Load a corpus from its manifest, verifying alignment and checksums."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadManifest(f"cannot parse {manifest_path}: {exc}") from exc
    required = ("name", "src_lang", "tgt_lang", "src_file", "tgt_file",
                "src_provenance", "tgt_provenance", "pair_count",
                "src_sha256", "tgt_sha256")
    missing = [k for k in required if k not in manifest]
    if missing:
        raise BadManifest(f"{manifest_path}: missing fields {missing}")

    src_lang = validate_language(manifest["src_lang"], registry)
    tgt_lang = validate_language(manifest["tgt_lang"], registry)
    base = manifest_path.parent
    src_path = base / manifest["src_file"]
    tgt_path = base / manifest["tgt_file"]
    for path, want in ((src_path, manifest["src_sha256"]),
                       (tgt_path, manifest["tgt_sha256"])):
        got = _sha256(path.read_bytes()) if path.exists() else None
        if got is None:
            raise BadManifest(f"{manifest_path}: missing file {path.name}")
        if got != want:
            raise BadManifest(f"{path}: checksum mismatch (corrupt or edited)")

    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise MisalignedFiles(len(src_lines), len(tgt_lines))
    if len(src_lines) != manifest["pair_count"]:
        raise BadManifest(
            f"{manifest_path}: pair_count {manifest['pair_count']} but files "
            f"hold {len(src_lines)} lines")

    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1):
        if not src.rstrip():
            raise EmptyLine(str(src_path), i)
        if not tgt.rstrip():
            raise EmptyLine(str(tgt_path), i)
        pairs.append(SentencePair(src, tgt))

    return BitextCorpus(
        name=manifest["name"],
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        pairs=tuple(pairs),
        src_provenance=Provenance.from_json(manifest["src_provenance"]),
        tgt_provenance=Provenance.from_json(manifest["tgt_provenance"]),
    )


def write_bitext(corpus: BitextCorpus, out_dir: str | Path) -> Path:
    """Write text files plus manifest under *out_dir*; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    src_name = f"{corpus.name}.{corpus.src_lang}"
    tgt_name = f"{corpus.name}.{corpus.tgt_lang}"

    def render(lines: list[str]) -> bytes:
        return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")

    src_bytes = render(corpus.src_sentences)
    tgt_bytes = render(corpus.tgt_sentences)
    (out_dir / src_name).write_bytes(src_bytes)
    (out_dir / tgt_name).write_bytes(tgt_bytes)

    manifest = {
        "name": corpus.name,
        "src_lang": corpus.src_lang,
        "tgt_lang": corpus.tgt_lang,
        "src_file": src_name,
        "tgt_file": tgt_name,
        "src_provenance": corpus.src_provenance.to_json(),
        "tgt_provenance": corpus.tgt_provenance.to_json(),
        "pair_count": len(corpus),
        "src_sha256": _sha256(src_bytes),
        "tgt_sha256": _sha256(tgt_bytes),
    }
    manifest_path = out_dir / f"{corpus.name}.json"
    manifest_path.write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8")
    return manifest_path


def split_validation(corpus: BitextCorpus, n: int = 3000
                     ) -> tuple[BitextCorpus, BitextCorpus]:
    """Reserve the first *n* pairs (released file order) for validation.

    Returns (validation, train); both keep the original ordering and
    side provenance. n may exceed the corpus, leaving an empty train set.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    head, tail = corpus.pairs[:n], corpus.pairs[n:]
    mk = lambda suffix, pairs: BitextCorpus(
        name=f"{corpus.name}-{suffix}",
        src_lang=corpus.src_lang,
        tgt_lang=corpus.tgt_lang,
        pairs=pairs,
        src_provenance=corpus.src_provenance,
        tgt_provenance=corpus.tgt_provenance,
    )
    return mk("valid", head), mk("train", tail)


@dataclass(frozen=True)
class CorpusStats:
    name: str
    pair_count: int
    src_tokens: int
    tgt_tokens: int
    src_chars: int
    tgt_chars: int

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "pair_count": self.pair_count,
            "src_tokens": self.src_tokens,
            "tgt_tokens": self.tgt_tokens,
            "src_chars": self.src_chars,
            "tgt_chars": self.tgt_chars,
        }


def corpus_stats(corpus: BitextCorpus) -> CorpusStats:
    """Pair, whitespace-token, and character counts (deterministic)."""
    return CorpusStats(
        name=corpus.name,
        pair_count=len(corpus),
        src_tokens=sum(len(p.src.split()) for p in corpus.pairs),
        tgt_tokens=sum(len(p.tgt.split()) for p in corpus.pairs),
        src_chars=sum(len(p.src) for p in corpus.pairs),
        tgt_chars=sum(len(p.tgt) for p in corpus.pairs),
    )


def clean_corpus(corpus: BitextCorpus,
                 max_length_ratio: float | None = None,
                 dedup: bool = False) -> tuple[BitextCorpus, int]:
    """Optional filtering pass; never applied implicitly.

    Drops pairs whose whitespace-token length ratio exceeds
    *max_length_ratio* and, with *dedup*, exact duplicate pairs (first
    occurrence kept). Returns the cleaned corpus and the removed count.
    """
    kept: list[SentencePair] = []
    seen: set[tuple[str, str]] = set()
    for pair in corpus.pairs:
        if max_length_ratio is not None:
            ls, lt = len(pair.src.split()), len(pair.tgt.split())
            if max(ls, lt) / max(min(ls, lt), 1) > max_length_ratio:
                continue
        if dedup:
            key = (pair.src, pair.tgt)
            if key in seen:
                continue
            seen.add(key)
        kept.append(pair)
    cleaned = BitextCorpus(
        name=f"{corpus.name}-clean",
        src_lang=corpus.src_lang,
        tgt_lang=corpus.tgt_lang,
        pairs=tuple(kept),
        src_provenance=corpus.src_provenance,
        tgt_provenance=corpus.tgt_provenance,
    )
    return cleaned, len(corpus) - len(kept)


def concat_corpora(name: str, corpora: Sequence[BitextCorpus]) -> BitextCorpus:
    """Concatenate same-direction corpora; provenance falls back to the
    most permissive side label (synthetic wins if any part is synthetic)."""
    if not corpora:
        raise ValueError("nothing to concatenate")
    first = corpora[0]
    for c in corpora[1:]:
        if (c.src_lang, c.tgt_lang) != (first.src_lang, first.tgt_lang):
            raise BadManifest(
                f"cannot concatenate {c.name}: {c.src_lang}-{c.tgt_lang} vs "
                f"{first.src_lang}-{first.tgt_lang}")
    pairs = tuple(p for c in corpora for p in c.pairs)

    def merge_side(provs: list[Provenance]) -> Provenance:
        synth = [p for p in provs if p.kind == "synthetic"]
        if not synth:
            return REAL
        ids = sorted({p.generator_id or "" for p in synth})
        return Provenance("synthetic", "+".join(ids))

    return BitextCorpus(
        name=name,
        src_lang=first.src_lang,
        tgt_lang=first.tgt_lang,
        pairs=pairs,
        src_provenance=merge_side([c.src_provenance for c in corpora]),
        tgt_provenance=merge_side([c.tgt_provenance for c in corpora]),
    )
