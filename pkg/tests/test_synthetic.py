import pytest

from rankcompare.analyses import overlap_matrix
from rankcompare.entity_link import link_datasets
from rankcompare.errors import ValidationError
from rankcompare.ingest import manifest_text, table_text
from rankcompare.series import IndicatorSeries
from rankcompare.stats import spearman
from rankcompare.synthetic import (SyntheticSpec, allocate, generate_synthetic,
                                   generate_synthetic_corpus, write_corpus)


def spec(**kw):
    obj = {
        "countries": {"US": 2, "DE": 1, "IT": 1}, "shared_fraction": 0.5,
        "systems": [
            {"system_id": "A", "size": 120, "indicators": [{"name": "x"}, {"name": "y"}]},
            {"system_id": "B", "size": 100, "indicators": [
                {"name": "r", "kind": "rank"}, {"name": "k", "kind": "class_A_to_E", "coverage": 0.28}]},
        ],
        "correlations": [{"a": "A:x", "b": "A:y", "rho": 0.6}],
    }
    obj.update(kw)
    return SyntheticSpec.from_json(obj)


def serialized(datasets):
    return [(manifest_text(d.manifest), table_text(d)) for d in datasets]


def local_series(ds, name):
    ind = ds.manifest.indicator(name)
    return IndicatorSeries(ds.system_id, name, {r.local_id: r.values[name] for r in ds.records},
                           ind.kind, ind.higher_is_better)


def test_deterministic_per_seed():
    a = serialized(generate_synthetic_corpus(1, None, spec()))
    b = serialized(generate_synthetic_corpus(1, None, spec()))
    c = serialized(generate_synthetic_corpus(2, None, spec()))
    assert a == b and a != c


def test_write_corpus_bytes(tmp_path):
    ds = generate_synthetic_corpus(3, None, spec())
    write_corpus(ds, tmp_path / "one")
    write_corpus(generate_synthetic_corpus(3, None, spec()), tmp_path / "two")
    for f in sorted((tmp_path / "one").iterdir()):
        assert f.read_bytes() == (tmp_path / "two" / f.name).read_bytes()


def test_n_systems_prefix():
    ds = generate_synthetic_corpus(1, 1, spec())
    assert [d.system_id for d in ds] == ["A"]


def test_full_overlap():
    s = spec(shared_fraction=1.0, systems=[
        {"system_id": "A", "size": 80, "indicators": [{"name": "x"}]},
        {"system_id": "B", "size": 80, "indicators": [{"name": "x"}]}], correlations=[])
    corpus, _, _ = link_datasets(generate_synthetic_corpus(4, None, s))
    assert overlap_matrix(corpus).counts == ((80, 80), (80, 80))


@pytest.mark.parametrize("bad", [1.5, -0.1])
def test_infeasible_shared_fraction(bad):
    with pytest.raises(ValidationError):
        spec(shared_fraction=bad)


def test_infeasible_correlations():
    s = spec(systems=[{"system_id": "A", "size": 50, "indicators": [{"name": n} for n in "abc"]}],
             correlations=[{"a": "A:a", "b": "A:b", "rho": 0.9}, {"a": "A:a", "b": "A:c", "rho": 0.9},
                           {"a": "A:b", "b": "A:c", "rho": -0.9}])
    with pytest.raises(ValidationError, match="infeasible"):
        generate_synthetic(1, s)


def test_coverage_and_kinds():
    gen = generate_synthetic(5, spec())
    b = gen.datasets[1]
    k = [r.values["k"] for r in b.records]
    assert sum(v is not None for v in k) == 28
    assert set(v for v in k if v is not None) <= set("ABCDE")
    ranks = sorted(r.values["r"] for r in b.records)
    assert ranks == list(range(1, 101))


def test_shared_ids_are_ground_truth():
    gen = generate_synthetic(5, spec())
    a, b = gen.datasets
    shared = {r.local_id for r in a.records} & {r.local_id for r in b.records}
    assert len(shared) == 50
    corpus, _, _ = link_datasets(list(gen.datasets))
    linked = {corpus.provenance[(cid, "A")] for cid, p in corpus.presence.items() if p == {"A", "B"}}
    assert linked == shared


def test_planted_correlation_recovered():
    gen = generate_synthetic(11, spec())
    a = gen.datasets[0]
    assert spearman(local_series(a, "x"), local_series(a, "y")).rho == pytest.approx(0.6, abs=0.05)


def test_allocate_largest_remainder():
    assert allocate(10, {"US": 1, "DE": 1, "IT": 1}) == {"DE": 4, "IT": 3, "US": 3}
    assert sum(allocate(997, {"a": 0.3, "b": 0.3, "c": 0.4}).values()) == 997


def test_bundled_spec_loads():
    from importlib import resources
    import json
    obj = json.loads((resources.files("rankcompare") / "data" / "synthetic_spec.json").read_text())
    s = SyntheticSpec.from_json(obj)
    assert [x.system_id for x in s.systems] == ["ARWU", "LEIDEN", "QS", "THE", "UMR"]
