import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_dataset
from rankcompare.entity_link import (NormalizationRules, Thesaurus, build_thesaurus, jaccard,
                                     link, link_datasets, load_rules, normalize_name)
from rankcompare.errors import LinkageConflictError, ValidationError
from rankcompare.ingest import RankingDataset

RULES = load_rules()


def norm(s):
    return normalize_name(s, RULES)


def ds(system, names, country="US", values=None):
    rows = [(str(i), n, country, {"score": (values or {}).get(n, float(i))}) for i, n in enumerate(names)]
    return make_dataset(system, rows)


# -- normalize_name -------------------------------------------------------------

@pytest.mark.parametrize("raw,expected", [
    ("Univ. of Roma ", "university of rome"),
    ("UNIVERSITÄT X", "universitat x"),
    ("Texas A&M Univ", "texas a and m university"),
    ("Inst. of Sci. & Tech.", "institute of science and technology"),
    ("Politecnico di Milano", "politecnico di milan"),
    ("  Many   spaces\tUniversity ", "many spaces university"),
])
def test_normalize_examples(raw, expected):
    assert norm(raw) == expected


@given(st.text(min_size=1, max_size=40))
def test_normalize_idempotent(s):
    once = norm(s)
    assert norm(once) == once


@given(st.lists(st.sampled_from(["univ", "u", "roma", "Tech", "ÉCOLE", "&", "of", "inst.", "munchen",
                                 "sci", "St.", "x-y"]), min_size=1, max_size=8))
def test_normalize_idempotent_rule_heavy(tokens):
    once = norm(" ".join(tokens))
    assert norm(once) == once


def test_rules_must_be_fixed_points():
    with pytest.raises(ValidationError):
        NormalizationRules(term_map={"univ": "university", "university": "uni"})
    with pytest.raises(ValidationError):
        NormalizationRules(term_map={"Univ.": "university"})


# -- build_thesaurus -------------------------------------------------------------

def test_exact_match_links():
    corpus, th, rep = link_datasets([ds("A", ["University of X"]), ds("B", ["Univ. of X"])])
    assert len(corpus.institutions) == 1
    (cid,) = corpus.institutions
    assert corpus.presence[cid] == {"A", "B"}
    assert len(rep.auto_links) == 1 and rep.auto_links[0]["system_id"] == "B"


def test_campus_qualifier_never_autolinks():
    a = ds("A", ["U Arkansas"])
    b = ds("B", ["U Arkansas at Fayetteville"])
    corpus, th, rep = link_datasets([a, b])
    assert len(corpus.institutions) == 2
    assert rep.auto_links == ()
    (cand,) = rep.candidates
    assert cand["reason"] == "campus_qualifier"
    assert cand["raw_name"] == "U Arkansas at Fayetteville"
    assert cand["matched_variant"] == "university arkansas"


def test_campus_qualifier_either_order_and_city_suffix():
    corpus, _, rep = link_datasets([ds("A", ["University of Massachusetts Amherst"]),
                                    ds("B", ["University of Massachusetts"])])
    assert len(corpus.institutions) == 2
    assert [c["reason"] for c in rep.candidates] == ["campus_qualifier"]


def test_similar_names_are_candidates_not_links():
    a = ds("A", ["Royal Institute of Technology Stockholm Sweden Main"])
    b = ds("B", ["Royal Institute of Technology Stockholm Sweden"])
    corpus, _, rep = link_datasets([a, b], threshold=0.8)
    assert len(corpus.institutions) == 2
    (cand,) = rep.candidates
    assert cand["reason"] == "similar_name" and cand["similarity"] == pytest.approx(5 / 6, abs=1e-6)


def test_country_conflict_not_linked():
    a = make_dataset("A", [("1", "University of Georgia", "US", {"score": 1.0})])
    b = make_dataset("B", [("1", "University of Georgia", "GE", {"score": 1.0})])
    corpus, _, rep = link_datasets([a, b])
    assert len(corpus.institutions) == 2
    assert [c["reason"] for c in rep.candidates] == ["country_conflict"]
    assert {corpus.country(c) for c in corpus.institutions} == {"US", "GE"}


def test_candidates_never_merge_over_many_systems():
    variants = ["Stanford University", "Stanford University at Palo Alto", "Stanford Univ. Medical"]
    corpus, _, rep = link_datasets([ds(f"S{i}", [v]) for i, v in enumerate(variants)])
    assert len(corpus.institutions) == 3
    assert all(len(p) == 1 for p in corpus.presence.values())


def test_thesaurus_tsv_roundtrip(tmp_path):
    _, th, _ = link_datasets([ds("A", ["Univ. Roma", "Tech Univ München", "Zeta College"]),
                              ds("B", ["University of Rome", "Technology University Munich"])])
    text = th.to_tsv()
    assert text.splitlines()[0] == "variant\tcanonical_id\tcanonical_name\tcountry"
    back = Thesaurus.from_tsv(text)
    assert back.to_tsv() == text
    th.save(tmp_path / "t.tsv")
    assert (tmp_path / "t.tsv").read_bytes() == text.encode("utf-8")
    assert Thesaurus.load(tmp_path / "t.tsv") == back


def test_thesaurus_rejects_unsorted_or_dangling():
    good = "variant\tcanonical_id\tcanonical_name\tcountry\nb\tc1\tB\tUS\na\tc1\tB\tUS\n"
    with pytest.raises(Exception):
        Thesaurus.from_tsv(good)
    with pytest.raises(Exception):
        Thesaurus({"x": "missing"}, {})


def test_prior_thesaurus_reused():
    _, th, _ = link_datasets([ds("A", ["Alpha University"])])
    corpus, th2, rep = link_datasets([ds("B", ["Alpha Univ."])], prior=th)
    assert len(rep.auto_links) == 1
    assert th2.entries == th.entries


def test_canonical_ids_stable():
    a, _, _ = link_datasets([ds("A", ["Alpha University", "Beta College"])])
    b, _, _ = link_datasets([ds("A", ["Alpha University", "Beta College"])])
    assert list(a.institutions) == list(b.institutions)


# -- link ---------------------------------------------------------------------

def test_single_dataset_empty_thesaurus_singletons():
    d = ds("A", ["Alpha", "Beta", "Gamma"])
    corpus = link([d], Thesaurus({}, {}))
    assert len(corpus.institutions) == 3
    assert all(c.startswith("s") for c in corpus.institutions)
    assert all(p == {"A"} for p in corpus.presence.values())


def test_link_conflicting_duplicate_raises():
    d = make_dataset("A", [("1", "Alpha University", "US", {"score": 1.0}),
                           ("2", "Alpha Univ.", "US", {"score": 2.0})])
    with pytest.raises(LinkageConflictError):
        link_datasets([d])


def test_link_identical_duplicate_merges():
    d = make_dataset("A", [("1", "Alpha University", "US", {"score": 1.0}),
                           ("2", "Alpha Univ.", "US", {"score": 1.0})])
    corpus, _, rep = link_datasets([d])
    assert len(corpus.institutions) == 1
    assert [c["reason"] for c in rep.candidates] == ["duplicate_in_system"]


def test_link_preserves_values_and_missing(tiny_pair):
    corpus, _, _ = link_datasets(list(tiny_pair))
    assert len(corpus.institutions) == 5
    alpha = next(c for c, i in corpus.institutions.items() if i.name == "University of Alpha")
    assert corpus.value(alpha, "A", "score") == 10.0 and corpus.value(alpha, "B", "score") == 3.0
    delta = next(c for c, i in corpus.institutions.items() if i.name == "Delta College")
    assert corpus.presence[delta] == {"B"}
    assert ("B" in corpus.presence[delta]) and corpus.value(delta, "B", "score") is None
    assert sum(len(d) for d in tiny_pair) >= len(corpus.institutions)


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_link_permutation_invariant(rnd):
    names = ["Alpha University", "Univ of Beta", "Gamma Inst. of Tech.", "Delta College", "Epsilon U"]
    other = ["Alpha Univ", "Beta University", "Zeta", "Gamma Institute of Technology"]
    a, b = ds("A", names), ds("B", other)
    base = link_datasets([a, b])[0]
    shuffled = []
    for d in (a, b):
        recs = list(d.records)
        rnd.shuffle(recs)
        shuffled.append(RankingDataset(d.manifest, tuple(recs)))
    again = link_datasets(shuffled)[0]
    assert again == base


def test_jaccard_edges():
    assert jaccard(frozenset(), frozenset()) == 1.0
    assert jaccard(frozenset("ab"), frozenset("bc")) == pytest.approx(1 / 3)


def test_synthetic_ground_truth_precision():
    from rankcompare.synthetic import SyntheticSpec, generate_synthetic
    spec = SyntheticSpec.from_json({
        "countries": {"US": 3, "DE": 1, "IT": 1}, "shared_fraction": 0.7, "campus_decoys": 3,
        "systems": [{"system_id": s, "size": n, "indicators": [{"name": "v"}]}
                    for s, n in (("A", 300), ("B", 250), ("C", 200))]})
    gen = generate_synthetic(7, spec)
    corpus, _, rep = link_datasets(list(gen.datasets))
    truth = {}
    for (cid, sid), lid in corpus.provenance.items():
        truth.setdefault(cid, set()).add(lid)
    assert all(len(v) == 1 for v in truth.values())
    # every shared institution is found in all three systems
    shared = sum(1 for p in corpus.presence.values() if len(p) == 3)
    assert shared == round(0.7 * 200)
    assert any(c["reason"] == "campus_qualifier" for c in rep.candidates)
