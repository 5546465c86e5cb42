"""Per-speaker/per-party referent-class profiles and PCA with loadings.

The covariance eigendecomposition runs cyclic Jacobi rotations: the profile
matrix is at most 9 columns wide, so a general SVD is unnecessary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .annotation import RefClass
from .corpus import CorpusError, Segment, parse_instance_id

log = logging.getLogger(__name__)


@dataclass
class ProfileMatrix:
    groups: list  # row labels (speakers or parties)
    classes: list  # column labels, the 9 RefClasses
    rates: np.ndarray  # (groups, 9) occurrences per 1000 tokens
    raw_counts: np.ndarray  # (groups, 9) int
    tokens: np.ndarray  # (groups,) int


def build_profiles(
    gold: Mapping, segments: Iterable[Segment], group_by: str = "speaker"
) -> ProfileMatrix:
    """Referent-class rates per 1000 tokens for each speaker or party."""
    if group_by not in ("party", "speaker"):
        raise ValueError(f"group_by must be 'party' or 'speaker', got {group_by!r}")
    segments = list(segments)
    by_key = {seg.key(): seg for seg in segments}

    def group_of(seg: Segment) -> str:
        return seg.party if group_by == "party" else seg.speaker

    tokens: dict = {}
    for seg in segments:
        g = group_of(seg)
        tokens[g] = tokens.get(g, 0) + seg.n_tokens()
    counts: dict = {}
    for instance_id, label in gold.items():
        doc_id, seg_idx, _ = parse_instance_id(instance_id)
        seg = by_key.get((doc_id, seg_idx))
        if seg is None:
            raise CorpusError(f"gold instance {instance_id!r} has no segment metadata")
        g = group_of(seg)
        counts.setdefault(g, np.zeros(len(RefClass), dtype=int))[label.value] += 1

    groups = []
    for g in sorted(tokens):
        if tokens[g] == 0:
            log.warning("group %r has no tokens; dropped from the profile matrix", g)
            continue
        groups.append(g)
    raw = np.stack([counts.get(g, np.zeros(len(RefClass), dtype=int)) for g in groups]) if groups else np.zeros((0, len(RefClass)), dtype=int)
    tok = np.array([tokens[g] for g in groups], dtype=int)
    rates = raw * 1000.0 / tok[:, None] if groups else np.zeros((0, len(RefClass)))
    return ProfileMatrix(groups=groups, classes=list(RefClass), rates=rates, raw_counts=raw, tokens=tok)


@dataclass
class PCAResult:
    components: np.ndarray  # (m, d) rows are orthonormal directions
    eigenvalues: np.ndarray  # (m,) descending variances
    loadings: np.ndarray  # (m, d) components scaled by sqrt(eigenvalue)
    scores: np.ndarray  # (n, m) row projections
    explained_variance_ratio: np.ndarray  # (m,)
    column_names: list
    column_means: np.ndarray
    column_scales: np.ndarray  # ones when standardize=False


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100) -> tuple:
    """Eigenvalues/eigenvectors of a small symmetric matrix via cyclic Jacobi."""
    a = np.array(matrix, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d) or not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("jacobi_eigh expects a symmetric square matrix")
    v = np.eye(d)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.trace(np.abs(a))):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def pca(
    data: np.ndarray | ProfileMatrix,
    standardize: bool = False,
    n_components: int | None = None,
) -> PCAResult:
    """PCA of the sample covariance; columns centered, optionally z-scored.

    Sign convention: the largest-magnitude entry of every component is positive.
    """
    if isinstance(data, ProfileMatrix):
        x = data.rates
        names = [cls.name for cls in data.classes]
    else:
        x = np.asarray(data, dtype=float)
        names = [f"col{i}" for i in range(x.shape[1])]
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError("pca needs at least 2 rows and 2 columns")

    means = x.mean(axis=0)
    centered = x - means
    scales = np.ones(x.shape[1])
    if standardize:
        std = centered.std(axis=0, ddof=1)
        keep = std > 0
        if not keep.all():
            dropped = [names[i] for i in np.flatnonzero(~keep)]
            log.warning("zero-variance columns dropped under standardization: %s", dropped)
            centered = centered[:, keep]
            means = means[keep]
            std = std[keep]
            names = [n for n, k in zip(names, keep) if k]
        if centered.shape[1] < 2:
            raise ValueError("fewer than 2 columns with nonzero variance")
        centered = centered / std
        scales = std

    covariance = centered.T @ centered / (centered.shape[0] - 1)
    eigenvalues, vectors = jacobi_eigh(covariance)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    total_variance = float(np.trace(covariance))

    # orient each component so its largest-magnitude coordinate is positive
    for j in range(vectors.shape[1]):
        pivot = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[pivot, j] < 0:
            vectors[:, j] = -vectors[:, j]

    m = centered.shape[1] if n_components is None else min(n_components, centered.shape[1])
    components = vectors[:, :m].T
    scores = centered @ components.T
    loadings = components * np.sqrt(eigenvalues[:m])[:, None]
    ratio = eigenvalues[:m] / total_variance if total_variance > 0 else np.zeros(m)
    return PCAResult(
        components=components,
        eigenvalues=eigenvalues[:m],
        loadings=loadings,
        scores=scores,
        explained_variance_ratio=ratio,
        column_names=names,
        column_means=means,
        column_scales=scales,
    )


# ---------------------------------------------------------------------------
# deterministic SVG biplot

def _fmt(x: float) -> str:
    return f"{x:.3f}"


def emit_biplot(
    result: PCAResult,
    point_labels: Iterable[str],
    path: str | Path,
    width: int = 640,
    height: int = 640,
) -> None:
    """Scores as points and loadings as arrows over PC1/PC2, written as SVG.

    Output bytes depend only on the inputs, so identical runs produce
    identical files.
    """
    if result.components.shape[0] < 2:
        raise ValueError("biplot needs at least 2 principal components")
    point_labels = list(point_labels)
    xs, ys = result.scores[:, 0], result.scores[:, 1]
    lx, ly = result.loadings[0], result.loadings[1]

    margin = 60.0
    span = max(
        float(np.max(np.abs(xs), initial=0.0)),
        float(np.max(np.abs(ys), initial=0.0)),
        float(np.max(np.abs(lx), initial=0.0)),
        float(np.max(np.abs(ly), initial=0.0)),
        1e-9,
    ) * 1.15

    def sx(v: float) -> float:
        return margin + (v + span) / (2 * span) * (width - 2 * margin)

    def sy(v: float) -> float:
        return height - margin - (v + span) / (2 * span) * (height - 2 * margin)

    pc1 = 100.0 * result.explained_variance_ratio[0]
    pc2 = 100.0 * result.explained_variance_ratio[1]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{_fmt(sx(-span))}" y1="{_fmt(sy(0))}" x2="{_fmt(sx(span))}" y2="{_fmt(sy(0))}" '
        'stroke="#cccccc" stroke-width="1"/>',
        f'<line x1="{_fmt(sx(0))}" y1="{_fmt(sy(-span))}" x2="{_fmt(sx(0))}" y2="{_fmt(sy(span))}" '
        'stroke="#cccccc" stroke-width="1"/>',
        f'<text x="{width / 2:.0f}" y="{height - 16}" text-anchor="middle" font-size="13">'
        f"PC1 ({_fmt(pc1)}% variance)</text>",
        f'<text x="18" y="{height / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {height / 2:.0f})">PC2 ({_fmt(pc2)}% variance)</text>',
    ]
    for label, x, y in zip(point_labels, xs, ys):
        parts.append(
            f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" fill="#1f77b4" fill-opacity="0.8"/>'
        )
        parts.append(
            f'<text x="{_fmt(sx(x) + 6)}" y="{_fmt(sy(y) - 4)}" font-size="11" fill="#1f77b4">{label}</text>'
        )
    for name, x, y in zip(result.column_names, lx, ly):
        parts.append(
            f'<line x1="{_fmt(sx(0))}" y1="{_fmt(sy(0))}" x2="{_fmt(sx(x))}" y2="{_fmt(sy(y))}" '
            'stroke="#d62728" stroke-width="1.5" marker-end="url(#arrow)"/>'
        )
        parts.append(
            f'<text x="{_fmt(sx(x) + 4)}" y="{_fmt(sy(y) + 4)}" font-size="12" fill="#d62728">{name}</text>'
        )
    parts.insert(
        1,
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#d62728"/></marker></defs>',
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# CSV emissions

def write_profiles_csv(profile: ProfileMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("group,tokens," + ",".join(cls.name for cls in RefClass) + ","
                 + ",".join(f"{cls.name}_count" for cls in RefClass) + "\n")
        for i, group in enumerate(profile.groups):
            rates = ",".join(f"{v:.6f}" for v in profile.rates[i])
            raw = ",".join(str(int(v)) for v in profile.raw_counts[i])
            fh.write(f"{group},{profile.tokens[i]},{rates},{raw}\n")


def write_pca_csv(result: PCAResult, point_labels: Iterable[str], out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    m = result.components.shape[0]
    with open(out_dir / "pca_eigenvalues.csv", "w", encoding="utf-8") as fh:
        fh.write("component,eigenvalue,explained_variance_ratio\n")
        for j in range(m):
            fh.write(f"PC{j + 1},{result.eigenvalues[j]:.10g},{result.explained_variance_ratio[j]:.10g}\n")
    with open(out_dir / "pca_loadings.csv", "w", encoding="utf-8") as fh:
        fh.write("variable," + ",".join(f"PC{j + 1}" for j in range(m)) + "\n")
        for i, name in enumerate(result.column_names):
            fh.write(name + "," + ",".join(f"{result.loadings[j, i]:.10g}" for j in range(m)) + "\n")
    with open(out_dir / "pca_scores.csv", "w", encoding="utf-8") as fh:
        fh.write("row," + ",".join(f"PC{j + 1}" for j in range(m)) + "\n")
        for i, label in enumerate(point_labels):
            fh.write(label + "," + ",".join(f"{result.scores[i, j]:.10g}" for j in range(m)) + "\n")
