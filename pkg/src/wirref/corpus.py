"""Debate corpus ingestion, pronoun instance extraction and derived exports.

Segments are paragraphs of parsed parliamentary speech with speaker/party/date
metadata.  Tokens carry a dependency tree (one root per sentence) that the
pattern matcher walks.  Three input formats are supported: CoNLL-U with
metadata comments, a minimal pre-tokenized debate XML, and the canonical
segment JSONL that round-trips losslessly.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

KNOWN_PARTIES = (
    "AfD",
    "CDU/CSU",
    "FDP",
    "GRÜNE",
    "LINKE",
    "SPD",
    "fraktionslos",
    "OTHER",
)

# A few spellings that occur in the open Bundestag data; anything else folds to OTHER.
_PARTY_ALIASES = {
    "BÜNDNIS 90/DIE GRÜNEN": "GRÜNE",
    "DIE GRÜNEN": "GRÜNE",
    "DIE LINKE": "LINKE",
    "Fraktionslos": "fraktionslos",
}

# wir/uns plus the unser-/unsr- paradigm; matching is case-insensitive whole-token.
_POSSESSIVE_SUFFIXES = ("e", "em", "en", "er", "es")
PRONOUN_INVENTORY = frozenset(
    {"wir", "uns", "unser", "unsre"}
    | {stem + suf for stem in ("unser", "unsr") for suf in _POSSESSIVE_SUFFIXES}
)


def is_first_person_plural(form: str) -> bool:
    """Whole-token, case-insensitive test against the 1PL inventory."""
    return form.casefold() in PRONOUN_INVENTORY


class CorpusError(ValueError):
    """Malformed corpus input (bad tree, unresolvable reference, bad format)."""


@dataclass(frozen=True)
class Token:
    index: int  # 0-based position within its sentence
    form: str
    lemma: str
    upos: str
    head: int | None  # 0-based index of the syntactic head, None for the root
    deprel: str


@dataclass
class Segment:
    doc_id: str
    segment_index: int
    sentences: list[list[Token]]
    speaker: str
    party: str
    date: str

    def tokens(self) -> Iterator[Token]:
        for sent in self.sentences:
            yield from sent

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def token_at(self, flat_index: int) -> Token:
        offset = 0
        for sent in self.sentences:
            if flat_index < offset + len(sent):
                return sent[flat_index - offset]
            offset += len(sent)
        raise CorpusError(
            f"flat token index {flat_index} out of range in "
            f"{self.doc_id}:{self.segment_index} ({self.n_tokens()} tokens)"
        )

    def key(self) -> tuple[str, int]:
        return (self.doc_id, self.segment_index)


@dataclass(frozen=True)
class PronounInstance:
    instance_id: str  # "doc_id:segment_index:flat_token_index"
    form: str  # original surface form
    doc_id: str
    segment_index: int
    flat_token_index: int


@dataclass
class CorpusStats:
    group_by: str
    tokens: dict
    instances: dict
    speakers: dict
    rate_per_1000: dict  # None for groups without tokens
    total_tokens: int
    total_instances: int
    total_speakers: int
    total_rate_per_1000: float | None


def normalize_party(raw: str) -> str:
    party = raw.strip()
    party = _PARTY_ALIASES.get(party, party)
    if party in KNOWN_PARTIES:
        return party
    log.warning("unknown party %r mapped to OTHER", raw)
    return "OTHER"


def validate_tree(tokens: list[Token]) -> None:
    """Check the single-rooted tree invariants; raise CorpusError on violation."""
    n = len(tokens)
    roots = [t.index for t in tokens if t.head is None]
    for t in tokens:
        if t.head == t.index:
            raise CorpusError(f"self-headed token {t.index} ({t.form!r})")
        if t.head is not None and not 0 <= t.head < n:
            raise CorpusError(f"token {t.index} heads out-of-range index {t.head}")
    if len(roots) != 1:
        raise CorpusError(f"expected exactly one root, found {len(roots)}")
    # walk up from every token; more than n steps means a cycle
    for t in tokens:
        seen = 0
        cur = t.head
        while cur is not None:
            cur = tokens[cur].head
            seen += 1
            if seen > n:
                raise CorpusError(f"cycle in dependency tree reachable from token {t.index}")


def _validate_segment(seg: Segment) -> None:
    if not seg.sentences or any(len(s) == 0 for s in seg.sentences):
        raise CorpusError("segment has empty sentence list or empty sentence")
    for sent in seg.sentences:
        validate_tree(sent)


# ---------------------------------------------------------------------------
# ingestion

def ingest(path: str | Path, format: str, strict: bool = False) -> list[Segment]:
    """Read a corpus file into validated Segments.

    Malformed records (bad trees) are dropped with a logged diagnostic naming
    doc_id/segment_index, or raised when strict=True.
    """
    readers = {"conllu": _read_conllu, "debate-xml": _read_debate_xml, "jsonl": _read_jsonl}
    if format not in readers:
        raise CorpusError(f"unknown corpus format {format!r}; expected one of {sorted(readers)}")
    segments = []
    for seg in readers[format](Path(path)):
        try:
            _validate_segment(seg)
        except CorpusError as err:
            msg = f"rejected segment {seg.doc_id}:{seg.segment_index}: {err}"
            if strict:
                raise CorpusError(msg) from err
            log.warning(msg)
            continue
        segments.append(seg)
    return segments


def _parse_conllu_head(raw: str) -> int | None:
    head = int(raw)
    return None if head == 0 else head - 1


def _read_conllu(path: Path) -> Iterator[Segment]:
    meta = {"doc_id": "", "segment": 0, "speaker": "", "party": "OTHER", "date": ""}
    current_key = None
    sentences: list[list[Token]] = []
    pending: list[tuple] = []  # raw token rows of the sentence in progress

    def finish_sentence():
        nonlocal pending
        if pending:
            sentences.append([Token(i, *row) for i, row in enumerate(pending)])
            pending = []

    def finish_segment():
        nonlocal sentences
        if current_key is not None and sentences:
            yield Segment(
                doc_id=current_key[0],
                segment_index=current_key[1],
                sentences=sentences,
                speaker=meta_of_segment["speaker"],
                party=meta_of_segment["party"],
                date=meta_of_segment["date"],
            )
        sentences = []

    meta_of_segment = dict(meta)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    continue
                key, value = (part.strip() for part in body.split("=", 1))
                if key == "doc_id":
                    meta["doc_id"] = value
                elif key == "segment":
                    meta["segment"] = int(value)
                elif key == "speaker":
                    meta["speaker"] = value
                elif key == "party":
                    meta["party"] = normalize_party(value)
                elif key == "date":
                    meta["date"] = value
                continue
            if line == "":
                finish_sentence()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise CorpusError(f"{path}: expected 10 CoNLL-U columns, got {len(cols)}: {line!r}")
            if "-" in cols[0] or "." in cols[0]:
                continue  # multiword-token ranges and empty nodes carry no tree position
            key = (meta["doc_id"], meta["segment"])
            if key != current_key:
                finish_sentence()
                yield from finish_segment()
                current_key = key
                meta_of_segment = dict(meta)
            pending.append((cols[1], cols[2], cols[3], _parse_conllu_head(cols[6]), cols[7]))
        finish_sentence()
        yield from finish_segment()


def _flat_tree(forms: list[str]) -> list[Token]:
    # tokenized but unparsed input: token 0 is the root, everything else hangs off it
    return [
        Token(i, form, form, "X", None if i == 0 else 0, "root" if i == 0 else "dep")
        for i, form in enumerate(forms)
    ]


def _read_debate_xml(path: Path) -> Iterator[Segment]:
    root = ET.parse(path).getroot()
    if root.tag != "debate":
        raise CorpusError(f"{path}: expected <debate> root element, found <{root.tag}>")
    doc_id = root.get("doc_id", path.stem)
    date = root.get("date", "")
    segment_index = 0
    for speech in root.iter("speech"):
        speaker = speech.get("speaker", "")
        party = normalize_party(speech.get("party", ""))
        for para in speech.iter("p"):
            sentences = []
            sent_elems = para.findall("s")
            if sent_elems:
                for s in sent_elems:
                    toks = []
                    for i, t in enumerate(s.findall("t")):
                        head_attr = t.get("head")
                        head = _parse_conllu_head(head_attr) if head_attr is not None else None
                        if head_attr is None:
                            head = None if i == 0 else 0
                        toks.append(
                            Token(
                                i,
                                t.get("form", ""),
                                t.get("lemma", t.get("form", "")),
                                t.get("upos", "X"),
                                head,
                                t.get("deprel", "root" if head is None else "dep"),
                            )
                        )
                    if toks:
                        sentences.append(toks)
            elif para.text and para.text.split():
                sentences.append(_flat_tree(para.text.split()))
            if sentences:
                yield Segment(doc_id, segment_index, sentences, speaker, party, date)
                segment_index += 1


def _read_jsonl(path: Path) -> Iterator[Segment]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"{path}:{line_no}: invalid JSON: {err}") from err
            sentences = [
                [
                    Token(i, t["form"], t["lemma"], t["upos"], t["head"], t["deprel"])
                    for i, t in enumerate(sent)
                ]
                for sent in obj["sentences"]
            ]
            yield Segment(
                doc_id=obj["doc_id"],
                segment_index=int(obj["segment"]),
                sentences=sentences,
                speaker=obj.get("speaker", ""),
                party=normalize_party(obj.get("party", "")),
                date=obj.get("date", ""),
            )


def segment_to_json(seg: Segment) -> dict:
    return {
        "doc_id": seg.doc_id,
        "segment": seg.segment_index,
        "speaker": seg.speaker,
        "party": seg.party,
        "date": seg.date,
        "sentences": [
            [
                {"form": t.form, "lemma": t.lemma, "upos": t.upos, "head": t.head, "deprel": t.deprel}
                for t in sent
            ]
            for sent in seg.sentences
        ],
    }


def emit_jsonl(segments: Iterable[Segment], path: str | Path) -> None:
    """Write segments in the canonical JSONL format (round-trips through ingest)."""
    with open(path, "w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(json.dumps(segment_to_json(seg), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# pronoun instances

def make_instance_id(doc_id: str, segment_index: int, flat_token_index: int) -> str:
    return f"{doc_id}:{segment_index}:{flat_token_index}"


def parse_instance_id(instance_id: str) -> tuple[str, int, int]:
    doc_id, seg, flat = instance_id.rsplit(":", 2)
    return doc_id, int(seg), int(flat)


def extract_instances(segments: Iterable[Segment]) -> list[PronounInstance]:
    """One instance per 1PL token, ordered by (doc_id, segment_index, flat index)."""
    instances = []
    for seg in segments:
        for flat, token in enumerate(seg.tokens()):
            if is_first_person_plural(token.form):
                instances.append(
                    PronounInstance(
                        instance_id=make_instance_id(seg.doc_id, seg.segment_index, flat),
                        form=token.form,
                        doc_id=seg.doc_id,
                        segment_index=seg.segment_index,
                        flat_token_index=flat,
                    )
                )
    instances.sort(key=lambda i: (i.doc_id, i.segment_index, i.flat_token_index))
    return instances


def index_segments(segments: Iterable[Segment]) -> dict:
    """Map (doc_id, segment_index) -> Segment."""
    index = {}
    for seg in segments:
        if seg.key() in index:
            raise CorpusError(f"duplicate segment {seg.doc_id}:{seg.segment_index}")
        index[seg.key()] = seg
    return index


def resolve_instance(instance_id: str, segindex: dict) -> tuple[Segment, int]:
    doc_id, seg_idx, flat = parse_instance_id(instance_id)
    seg = segindex.get((doc_id, seg_idx))
    if seg is None:
        raise CorpusError(f"instance {instance_id!r} refers to unknown segment")
    if flat >= seg.n_tokens():
        raise CorpusError(f"instance {instance_id!r} points past the segment end")
    return seg, flat


def instance_from_id(instance_id: str, segindex: dict) -> PronounInstance:
    """Rebuild a PronounInstance (including its surface form) from its id."""
    seg, flat = resolve_instance(instance_id, segindex)
    token = seg.token_at(flat)
    if not is_first_person_plural(token.form):
        raise CorpusError(f"instance {instance_id!r} does not point at a 1PL token ({token.form!r})")
    return PronounInstance(
        instance_id=instance_id,
        form=token.form,
        doc_id=seg.doc_id,
        segment_index=seg.segment_index,
        flat_token_index=flat,
    )


def context_window(segment: Segment, flat_index: int, width: int) -> tuple[list, list]:
    """Up to `width` tokens strictly left/right of the pronoun, within the segment."""
    if width < 0:
        raise ValueError("width must be >= 0")
    flat = list(segment.tokens())
    left = flat[max(0, flat_index - width) : flat_index]
    right = flat[flat_index + 1 : flat_index + 1 + width]
    return left, right


def split_pair(segment: Segment, flat_index: int) -> tuple[str, str]:
    """(S1, S2): left context / pronoun plus right context, space-joined."""
    forms = [t.form for t in segment.tokens()]
    return " ".join(forms[:flat_index]), " ".join(forms[flat_index:])


def export_pairs(
    instances: Iterable[PronounInstance],
    segindex: dict,
    gold: dict | None = None,
) -> list[dict]:
    rows = []
    for inst in instances:
        seg, flat = resolve_instance(inst.instance_id, segindex)
        s1, s2 = split_pair(seg, flat)
        row = {"instance_id": inst.instance_id, "s1": s1, "s2": s2}
        if gold is not None and inst.instance_id in gold:
            label = gold[inst.instance_id]
            row["label"] = label.name if hasattr(label, "name") else str(label)
        rows.append(row)
    return rows


def write_pairs(rows: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# corpus statistics

def corpus_stats(
    segments: Iterable[Segment],
    instances: Iterable[PronounInstance],
    group_by: str = "party",
) -> CorpusStats:
    if group_by not in ("party", "speaker"):
        raise ValueError(f"group_by must be 'party' or 'speaker', got {group_by!r}")
    segments = list(segments)
    segkey = {seg.key(): seg for seg in segments}

    def group_of(seg: Segment) -> str:
        return seg.party if group_by == "party" else seg.speaker

    tokens: dict = {}
    speakers: dict = {}
    for seg in segments:
        g = group_of(seg)
        tokens[g] = tokens.get(g, 0) + seg.n_tokens()
        speakers.setdefault(g, set()).add(seg.speaker)
    counts: dict = {g: 0 for g in tokens}
    for inst in instances:
        seg = segkey.get((inst.doc_id, inst.segment_index))
        if seg is None:
            raise CorpusError(f"instance {inst.instance_id} has no matching segment")
        counts[group_of(seg)] += 1

    rates = {
        g: (counts[g] * 1000.0 / tokens[g]) if tokens[g] > 0 else None for g in tokens
    }
    total_tokens = sum(tokens.values())
    total_instances = sum(counts.values())
    all_speakers = set().union(*speakers.values()) if speakers else set()
    return CorpusStats(
        group_by=group_by,
        tokens=tokens,
        instances=counts,
        speakers={g: len(s) for g, s in speakers.items()},
        rate_per_1000=rates,
        total_tokens=total_tokens,
        total_instances=total_instances,
        total_speakers=len(all_speakers),
        total_rate_per_1000=(total_instances * 1000.0 / total_tokens) if total_tokens else None,
    )


def format_stats_table(stats: CorpusStats) -> str:
    """One row per group with the rate reported to 1 decimal."""
    header = f"{stats.group_by:<16}{'#tokens':>10}{'#inst':>8}{'#spk':>6}{'per 1000':>10}"
    lines = [header, "-" * len(header)]
    for g in sorted(stats.tokens):
        rate = stats.rate_per_1000[g]
        rate_s = f"{rate:.1f}" if rate is not None else "n/a"
        lines.append(
            f"{g:<16}{stats.tokens[g]:>10}{stats.instances[g]:>8}{stats.speakers[g]:>6}{rate_s:>10}"
        )
    total_rate = stats.total_rate_per_1000
    lines.append(
        f"{'Total':<16}{stats.total_tokens:>10}{stats.total_instances:>8}"
        f"{stats.total_speakers:>6}{(f'{total_rate:.1f}' if total_rate is not None else 'n/a'):>10}"
    )
    return "\n".join(lines)
