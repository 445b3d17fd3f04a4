"""Smoke test for the pyannotmtp extension.

Build and install first:  pip install --no-build-isolation -e crates/python
Then run:                 python python/smoke_test.py
"""

import math
import pathlib
import random

import pyannotmtp as am

ROOT = pathlib.Path(__file__).resolve().parents[1]
FIXTURE = ROOT / "crates" / "core" / "tests" / "fixtures" / "go0004713"


def make_data(seed=7, genes=40, samples=16, shifted=8):
    rng = random.Random(seed)
    labels = [i % 2 for i in range(samples)]
    rows = []
    for g in range(genes):
        shift = 2.0 if g < shifted else 0.0
        rows.append([rng.gauss(0, 1) + (shift if l else 0.0) for l in labels])
    gene_ids = [f"G{g:03}" for g in range(genes)]
    sample_ids = [f"S{i:03}" for i in range(samples)]
    return am.SampleData(gene_ids, sample_ids, rows, labels, ("ctrl", "case")), gene_ids


def main():
    data, gene_ids = make_data()
    assert data.n_genes == 40 and data.class_counts == (8, 8)
    lt = data.lambda_t()
    assert len(lt) == 40 and all(math.isfinite(v) for v in lt)

    sets = [list(range(0, 10)), list(range(10, 25)), list(range(20, 40))]
    a = am.AnnotationMatrix.from_index_sets(gene_ids, ["T0", "T1", "T2"], sets)
    assert a.annotated_counts() == [10, 15, 20]

    psi = am.association(a, [abs(v) for v in lt], measure="welch_t")
    assert len(psi) == 3 and psi[0] > psi[2]

    # maxT on a hand null: maxima (1, 1, 0, 2), one-sided
    p = am.maxt_adjust([[1, -1, 0, 2], [0, 1, -1, 0]], [1.5, 0.5], two_sided=False)
    assert p == [0.25, 0.75], p

    lam, adj = am.de_maxt(data, b=200, seed=3, workers=1)
    assert len(adj) == 40 and min(adj[:8]) <= 0.05

    rep = am.assoc_test(data, a, "tt", b=100, seed=11)
    again = am.assoc_test(data, a, "tt", b=100, seed=11, workers=2)
    assert rep.rows() == again.rows()
    assert len(rep) == 3 and rep.rows()[0][0] == "T0"
    assert rep.to_tsv().startswith("term_id\tn_annotated\tpsi_hat\tstat\tadj_p\trank\n")

    chi = am.assoc_test(data, a, "neq-chi", b=50, seed=1, de_estimator="top:8")
    assert chi.realized_de_count == 8

    try:
        am.assoc_test(data, a, "tt", b=50, de_estimator="top:8")
    except ValueError:
        pass
    else:
        raise AssertionError("tt with a DE estimator should be rejected")

    dag = am.OntologyDag.read(str(FIXTURE / "terms.tsv"), str(FIXTURE / "edges.tsv"))
    assert dag.parents("GO:0004713") == ["GO:0004672"]
    assert len(dag.ancestors("GO:0004713")) == 8
    assert len(dag.children("GO:0004713")) == 3
    assert len(dag.offspring("GO:0004713")) == 21

    print(f"pyannotmtp {am.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
