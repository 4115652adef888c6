"""Desk-scale instance generators and the file formats they speak.

Graphs travel as TSV (`u<TAB>v<TAB>w`, 0-based ids), movie tables as
CSV (`id,rating,genres,q1..q25` with genres pipe-separated), image data
as a dense similarity CSV plus one pixel-spread value per line.  All
generators are deterministic per seed.
"""

import csv
import os

import numpy as np

from ..core import InputError

GENRES = ("action", "comedy", "drama", "horror", "scifi")
FEATURE_DIM = 25


def gen_cut_weights(n, rng, density=0.5):
    """Random symmetric weight matrix with zero diagonal."""
    if n < 1:
        raise InputError("need at least one node")
    W = np.where(rng.random((n, n)) < density, rng.random((n, n)), 0.0)
    W = np.triu(W, 1)
    return W + W.T


def gen_revenue_weights(n, rng, density=0.3):
    """Random directed influence weights, uniform on (0,1)."""
    if n < 1:
        raise InputError("need at least one node")
    W = np.where(rng.random((n, n)) < density, rng.random((n, n)), 0.0)
    np.fill_diagonal(W, 0.0)
    return W


def gen_movie_table(n, rng):
    """Ratings in [0,10], 1-3 genres each, 25-dim taste profiles."""
    if n < 1:
        raise InputError("need at least one movie")
    ratings = rng.random(n) * 10.0
    genres = []
    for _ in range(n):
        cnt = int(rng.integers(1, 4))
        picks = rng.choice(len(GENRES), size=cnt, replace=False)
        genres.append([GENRES[g] for g in sorted(picks)])
    qvecs = rng.random((n, FEATURE_DIM))
    return ratings, genres, qvecs


def gen_image_data(n, rng):
    """Cosine similarities of random non-negative feature vectors."""
    if n < 1:
        raise InputError("need at least one image")
    q = rng.random((n, 16)) + 1e-6
    norm = np.sqrt((q * q).sum(axis=1))
    sim = (q @ q.T) / (norm[:, None] * norm[None, :])
    pixel_std = rng.random(n) * 0.9 + 0.1
    return sim, pixel_std


def _write_graph_tsv(path, W, directed):
    n = W.shape[0]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u in range(n):
            start = 0 if directed else u + 1
            for v in range(start, n):
                if u != v and W[u, v] > 0:
                    fh.write("%d\t%d\t%.17g\n" % (u, v, W[u, v]))


def generate_synthetic(kind, n, seed, out_dir):
    """Write one synthetic instance; returns the created file paths."""
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    if kind == "cut":
        path = os.path.join(out_dir, "graph.tsv")
        _write_graph_tsv(path, gen_cut_weights(n, rng), directed=False)
        return [path]
    if kind == "revenue":
        path = os.path.join(out_dir, "graph.tsv")
        _write_graph_tsv(path, gen_revenue_weights(n, rng), directed=True)
        return [path]
    if kind == "movie":
        ratings, genres, qvecs = gen_movie_table(n, rng)
        path = os.path.join(out_dir, "movies.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "rating", "genres"] + ["q%d" % (i + 1) for i in range(FEATURE_DIM)])
            for i in range(n):
                w.writerow([i, "%.6f" % ratings[i], "|".join(genres[i])] + ["%.6f" % x for x in qvecs[i]])
        return [path]
    if kind == "image":
        sim, pixel_std = gen_image_data(n, rng)
        spath = os.path.join(out_dir, "similarity.csv")
        with open(spath, "w", encoding="utf-8", newline="\n") as fh:
            for row in sim:
                fh.write(",".join("%.17g" % x for x in row) + "\n")
        ppath = os.path.join(out_dir, "pixel_std.csv")
        with open(ppath, "w", encoding="utf-8", newline="\n") as fh:
            for x in pixel_std:
                fh.write("%.17g\n" % x)
        return [spath, ppath]
    raise InputError("unknown kind %r (expected cut, revenue, movie or image)" % (kind,))


def load_graph_tsv(path, directed):
    """Weight matrix from an edge list; node count is 1 + max id seen."""
    if not os.path.exists(path):
        raise InputError("no such file: %s" % path)
    edges = []
    top = -1
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InputError("%s line %d: expected u<TAB>v<TAB>w" % (path, ln))
            try:
                u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise InputError("%s line %d: malformed ids or weight" % (path, ln))
            if u < 0 or v < 0 or not np.isfinite(w) or w < 0:
                raise InputError("%s line %d: ids must be >= 0 and weights non-negative" % (path, ln))
            edges.append((u, v, w))
            top = max(top, u, v)
    if top < 0:
        raise InputError("%s: no edges" % path)
    W = np.zeros((top + 1, top + 1))
    for u, v, w in edges:
        W[u, v] = w
        if not directed:
            W[v, u] = w
    np.fill_diagonal(W, 0.0)
    return W


def load_movies_csv(path):
    """(ratings, genre lists, feature matrix) from a movie table."""
    if not os.path.exists(path):
        raise InputError("no such file: %s" % path)
    ratings, genres, rows = [], [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 3 + FEATURE_DIM or header[0] != "id":
            raise InputError("%s line 1: expected header id,rating,genres,q1..q%d" % (path, FEATURE_DIM))
        for ln, row in enumerate(reader, start=2):
            if len(row) != 3 + FEATURE_DIM:
                raise InputError("%s line %d: expected %d fields" % (path, ln, 3 + FEATURE_DIM))
            try:
                r = float(row[1])
                q = [float(x) for x in row[3:]]
            except ValueError:
                raise InputError("%s line %d: malformed number" % (path, ln))
            if not 0.0 <= r <= 10.0:
                raise InputError("%s line %d: rating outside [0, 10]" % (path, ln))
            ratings.append(r)
            genres.append([g for g in row[2].split("|") if g])
            rows.append(q)
    if not rows:
        raise InputError("%s: no movies" % path)
    return np.asarray(ratings), genres, np.asarray(rows)


def load_similarity_csv(path):
    if not os.path.exists(path):
        raise InputError("no such file: %s" % path)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise InputError("%s line %d: malformed number" % (path, ln))
    if not rows:
        raise InputError("%s: empty matrix" % path)
    mat = np.asarray(rows)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError("%s: matrix must be square, got shape %s" % (path, mat.shape))
    return mat


def load_vector_csv(path):
    if not os.path.exists(path):
        raise InputError("no such file: %s" % path)
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise InputError("%s line %d: malformed number" % (path, ln))
    if not vals:
        raise InputError("%s: empty vector" % path)
    return np.asarray(vals)
