import json
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linkforge.corpus import (CitationRecord, Corpus, DuplicateIdError, EmptyCorpusError, PaperRecord,
                              RecordNotFoundError, Role, get_citations, load_corpus, record_from_dict,
                              save_corpus)


def _line(pid, **kw):
    return json.dumps({"id": pid, "title": f"Title {pid}", "authors": ["A. Author"], "year": 2001, **kw})


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_load_three_records(tmp_path):
    c = load_corpus(_write(tmp_path / "c.jsonl", [_line("p1"), _line("p2"), _line("p3")]))
    assert len(c) == 3
    assert c.ids == ["p1", "p2", "p3"]
    assert c.malformed_lines == 0


def test_malformed_line_skipped_with_warning(tmp_path, caplog):
    path = _write(tmp_path / "c.jsonl", [_line("p1"), "{not json", _line("p2")])
    with caplog.at_level(logging.WARNING):
        c = load_corpus(path)
    assert len(c) == 2
    assert c.malformed_lines == 1
    assert sum("malformed" in r.message for r in caplog.records) == 1


@pytest.mark.parametrize("bad", [
    json.dumps({"title": "no id"}),
    json.dumps({"id": "x", "year": "2001"}),
    json.dumps({"id": "x", "year": 99999}),
    json.dumps({"id": "x", "authors": "A. B"}),
    json.dumps({"id": "x", "citations": "nope"}),
    json.dumps(["a", "list"]),
])
def test_type_violations_count_as_malformed(tmp_path, bad):
    c = load_corpus(_write(tmp_path / "c.jsonl", [_line("ok"), bad]))
    assert len(c) == 1 and c.malformed_lines == 1


def test_duplicate_id(tmp_path):
    with pytest.raises(DuplicateIdError) as err:
        load_corpus(_write(tmp_path / "c.jsonl", [_line("p1"), _line("p1")]))
    assert err.value.record_id == "p1"


def test_empty_file(tmp_path):
    with pytest.raises(EmptyCorpusError):
        load_corpus(_write(tmp_path / "c.jsonl", ["", "garbage"]))


def test_citations_and_lookup(tmp_path):
    cites = [{"title": f"Cited {i}", "authors": ["B. Cite"], "year": 1990 + i} for i in range(20)]
    c = load_corpus(_write(tmp_path / "c.jsonl", [_line("p1", citations=cites), _line("p2")]), Role.TARGET)
    assert c.role is Role.TARGET
    got = get_citations(c, "p1")
    assert len(got) == 20
    assert got[3].raw_id == "p1#3" and got[3].cited_by == "p1" and got[3].year == 1993
    assert get_citations(c, "p2") == []
    assert c.citation("p1#19").title == "Cited 19"
    assert c.n_citations == 20
    with pytest.raises(RecordNotFoundError):
        get_citations(c, "zzz")
    with pytest.raises(KeyError):
        c["zzz"]


def test_citation_raw_id_kept_when_given():
    rec = record_from_dict({"id": "p", "citations": [{"raw_id": "wos:123", "title": "x"}]})
    assert rec.citations[0].raw_id == "wos:123"
    assert rec.to_dict()["citations"][0]["raw_id"] == "wos:123"


def test_record_validation():
    with pytest.raises(ValueError):
        PaperRecord(id="")
    with pytest.raises(ValueError):
        PaperRecord(id="x", year=12)


def test_corpus_is_read_only():
    c = Corpus([PaperRecord("a")])
    with pytest.raises(TypeError):
        c._records["b"] = PaperRecord("b")


opt_text = st.one_of(st.none(), st.text(max_size=30))
names = st.lists(st.text(min_size=1, max_size=15), max_size=4)
years = st.one_of(st.none(), st.integers(1900, 2030))


@st.composite
def papers(draw, pid):
    n = draw(st.integers(0, 4))
    cites = tuple(CitationRecord(f"{pid}#{i}", draw(opt_text), tuple(draw(names)), draw(years), pid)
                  for i in range(n))
    return PaperRecord(pid, draw(opt_text), tuple(draw(names)), draw(years), draw(opt_text), draw(opt_text), cites)


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(*[papers(f"p{i}") for i in range(n)])))
def test_save_load_roundtrip(tmp_path_factory, recs):
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    save_corpus(Corpus(recs), path)
    back = load_corpus(path)
    assert [back[r.id] for r in recs] == list(recs)
