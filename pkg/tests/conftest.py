"""Shared builders for hand-made sentences, segments and corpora."""

from pathlib import Path

import pytest

from wirref.corpus import Segment, Token

FIXTURES = Path(__file__).parent / "fixtures"


def sent(*tokens):
    """Build a sentence from (form, lemma, upos, head, deprel) tuples."""
    return [Token(i, *t) for i, t in enumerate(tokens)]


def chain_sent(*forms, lemmas=None, upos=None):
    """Simple right-headed chain: token 0 is the root, token i heads i-1."""
    lemmas = lemmas or list(forms)
    upos = upos or ["X"] * len(forms)
    toks = []
    for i, form in enumerate(forms):
        head = None if i == 0 else i - 1
        deprel = "root" if i == 0 else "dep"
        toks.append(Token(i, form, lemmas[i], upos[i], head, deprel))
    return toks


def make_segment(sentences, doc_id="doc", segment_index=0, speaker="Speaker A",
                 party="SPD", date="2020-01-01"):
    return Segment(doc_id=doc_id, segment_index=segment_index, sentences=sentences,
                   speaker=speaker, party=party, date=date)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
