"""Smoke test for the construct_validity extension module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/construct_validity-*.whl
    python python/smoke_test.py
"""

import json
import math
import tempfile
from pathlib import Path

import construct_validity as cv


def close(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b}"


def check_kernels():
    ratings = [[9, 2, 5, 8], [6, 1, 3, 2], [8, 4, 6, 8], [7, 1, 2, 6], [10, 5, 6, 9], [6, 2, 4, 7]]
    r = cv.icc(ratings)
    close(r["icc_2_1"], 0.2898, 1e-4)
    close(r["icc_3_1"], 0.7148, 1e-4)

    scores, labels = [0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]
    close(cv.auc(scores, labels), 0.75)

    d = cv.cohens_d([2.0, 3.0, 4.0], [0.0, 1.0, 2.0])
    close(d["d"], 2.0)

    x = [[float(i)] for i in range(10)]
    fit = cv.ols(x, [1.0 + 2.0 * row[0] for row in x])
    close(fit["intercept"], 1.0, 1e-10)
    close(fit["coefficients"][0], 2.0, 1e-10)

    alpha = cv.krippendorff_alpha([[1.0, 2.0, 3.0, None], [1.0, 2.0, 3.0, 4.0]])
    close(alpha["alpha"], 1.0)

    try:
        cv.auc([0.1, 0.2], [1, 1])
    except cv.ValidityError as e:
        assert str(e).startswith("E_SINGLE_CLASS"), e
    else:
        raise AssertionError("single-class labels accepted")


def check_geometry():
    e = cv.euclidean_decomposition([1.0, 2.0], [3.0], [0.0, 0.0], [1.0])
    close(e["concept_term"] + e["nuisance_term"], e["total"])
    c = cv.cosine_decomposition([1.0, 0.0], [0.0], [1.0, 1.0], [0.0])
    close(c["total"], 1 / math.sqrt(2), 1e-12)

    w, a, b, s = [0.5, -1.0, 2.0], [1.0, 2.0, 3.0], [0.0, 1.0, -1.0], [10.0, -4.0, 7.0]
    before = cv.neutralize_score(w, a, b, bias=0.3)
    after = cv.neutralize_score(w, [p + q for p, q in zip(a, s)], [p + q for p, q in zip(b, s)], bias=0.3)
    close(before, after, 1e-12)

    rot = cv.rotation_ambiguity(dims=8, seed=3)
    close(rot["probe_r2_rotated"], rot["probe_r2_unrotated"], 1e-6)

    truth = cv.generate({"n_docs": 400, "c_dims": 1, "z_dims": 3, "embed_dims": 6}, seed=2)
    z = [1.0 if row[0] > 0 else 0.0 for row in truth["z"]]
    x = [emb[:] for emb in truth["embeddings"]]
    for row, zi in zip(x, z):
        row[0] += 3.0 * (2 * zi - 1)
    projected, state = cv.nullspace_project(x, z, max_iter=10, seed=1)
    assert len(projected) == 400 and len(projected[0]) == 6
    assert state["iterations"] >= 2, state


def check_cards():
    with tempfile.TemporaryDirectory() as tmp:
        path = cv.export_synthetic(
            tmp,
            {"n_docs": 600, "proxy_nuisance_share": 0.3},
            {"n_variants": 3, "jitter_sd": 0.1, "seed": 5},
            seed=5,
        )
        corpus = cv.Corpus(path)
        assert len(corpus) == 600
        assert corpus.variant_ids == ["jitter-0", "jitter-1", "jitter-2"]
        assert "z" in corpus.block_names
        assert len(corpus.matrix("jitter-0")[0]) == 16

        config = {
            "proxy": {"kind": "linear", "weights_path": "proxy_direction.bin"},
            "card2": {"gold": "gold", "gold_raters": ["gold_rater_0", "gold_rater_1", "gold_rater_2"]},
            "card3": {"blocks": ["z"], "label": "L"},
            "card5": {"outcome": "Y", "placebo": "Y_placebo"},
        }
        suite = corpus.run_suite(config)
        assert suite["schema_version"] == cv.SCHEMA_VERSION
        assert [r["card_id"] for r in suite["reports"]] == [
            "reliability",
            "convergent",
            "discriminant_incremental",
            "known_groups",
            "predictive",
        ]
        card3 = corpus.run_card(3, json.dumps(config))
        close(card3["statistics"]["step1.r_squared_full"]["value"], 0.30, 0.05)
        md = cv.render_markdown(card3)
        assert md.startswith("## Card 3: "), md[:40]
        assert Path(path).name == "manifest.json"


if __name__ == "__main__":
    check_kernels()
    check_geometry()
    check_cards()
    print("python smoke test passed")
