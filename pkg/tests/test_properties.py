"""Property tests over generated inputs for the core data-model invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from wirref.annotation import AnnotationRecord, RefClass, krippendorff_alpha
from wirref.corpus import context_window, extract_instances, split_pair
from wirref.weaksup import ABSTAIN, LabelMatrix, fit_label_model, majority_vote, predict_silver

from conftest import chain_sent, make_segment

forms = st.sampled_from(["wir", "uns", "Wir", "unser", "Land", "gut", "heute", "EU"])
sentences = st.lists(forms, min_size=1, max_size=10)
segments = st.lists(sentences, min_size=1, max_size=3).map(
    lambda sents: make_segment([chain_sent(*s) for s in sents])
)


@given(segments, st.integers(min_value=0, max_value=25))
def test_context_window_is_infix(segment, width):
    flat = [t.form for t in segment.tokens()]
    for idx in range(len(flat)):
        left, right = context_window(segment, idx, width)
        piece = [t.form for t in left] + [flat[idx]] + [t.form for t in right]
        assert " ".join(piece) in " ".join(flat)
        assert len(left) <= width and len(right) <= width


@given(segments)
def test_split_pair_reconstructs(segment):
    flat = [t.form for t in segment.tokens()]
    for idx in range(len(flat)):
        s1, s2 = split_pair(segment, idx)
        joined = (s1 + " " + s2) if s1 else s2
        assert joined == " ".join(flat)
        assert s2.split(" ")[0] == flat[idx]


@given(segments)
def test_extract_is_stable_and_sound(segment):
    first = extract_instances([segment])
    second = extract_instances([segment])
    assert first == second
    for inst in first:
        assert inst.form.casefold() in {
            "wir", "uns", "unser", "unsre", "unsere", "unserem", "unseren",
            "unserer", "unseres", "unsrem", "unsren", "unsrer", "unsres",
        }


pair_labels = st.tuples(st.integers(0, 2), st.integers(0, 2))


@given(st.lists(pair_labels, min_size=1, max_size=12))
def test_alpha_bounded_and_relabel_invariant(pairs):
    def records_of(mapping):
        out = []
        for k, (a, b) in enumerate(pairs):
            out.append(AnnotationRecord(f"i{k}", "A1", RefClass(mapping[a])))
            out.append(AnnotationRecord(f"i{k}", "A2", RefClass(mapping[b])))
        return out

    alpha = krippendorff_alpha(records_of({0: 0, 1: 1, 2: 2}))
    assert alpha <= 1.0 + 1e-12
    relabeled = krippendorff_alpha(records_of({0: 5, 1: 3, 2: 8}))
    assert abs(alpha - relabeled) < 1e-12


vote_rows = st.lists(
    st.lists(st.integers(min_value=-1, max_value=8), min_size=3, max_size=3),
    min_size=2,
    max_size=30,
)


@settings(deadline=None)
@given(vote_rows)
def test_silver_posteriors_sum_to_one(rows):
    votes = np.array(rows, dtype=np.int8)
    keep = (votes != ABSTAIN).any(axis=1)
    if not keep.any():
        return
    matrix = LabelMatrix(
        instance_ids=[f"i{k}" for k in range(int(keep.sum()))],
        lf_names=["a", "b", "c"],
        votes=votes[keep],
    )
    for silver in majority_vote(matrix):
        assert abs(silver.posterior.sum() - 1.0) < 1e-9
    params = fit_label_model(matrix, max_iter=20)
    assert abs(params.priors.sum() - 1.0) < 1e-9
    for silver in predict_silver(matrix, params):
        assert abs(silver.posterior.sum() - 1.0) < 1e-9
        assert silver.posterior.argmax() == silver.hard_label.value or (
            silver.posterior == silver.posterior.max()
        ).sum() > 1
