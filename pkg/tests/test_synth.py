import random

from hypothesis import given
from hypothesis import strategies as st

from linkforge.experiment import SAMPLE_SEED, SAMPLE_SIZE, load_sample, titles_path
from linkforge.synth import char_noise, junk_title, synthetic_clean_corpus, truncate_words


def test_bundled_sample_matches_generator():
    bundled = load_sample()
    fresh = synthetic_clean_corpus(SAMPLE_SIZE, seed=SAMPLE_SEED)
    assert bundled.ids == fresh.ids
    assert all(bundled[i] == fresh[i] for i in fresh.ids)
    assert len(titles_path().read_text().splitlines()) == SAMPLE_SIZE


def test_clean_corpus_properties():
    c = synthetic_clean_corpus(150, seed=1)
    assert len(c) == 150
    titles = [r.title.lower() for r in c]
    assert len(set(titles)) == len(titles)
    assert all(8 <= len(r.citations) <= 25 and r.authors and r.abstract for r in c)
    assert all(cite.cited_by == r.id for r in c for cite in r.citations)
    assert synthetic_clean_corpus(150, seed=1)[c.ids[7]] == c[c.ids[7]]
    assert synthetic_clean_corpus(150, seed=2)[c.ids[7]] != c[c.ids[7]]


@given(st.text(max_size=50), st.floats(0, 1), st.integers(0, 1000))
def test_char_noise_rate_zero_is_identity(text, rate, seed):
    assert char_noise(text, 0.0, random.Random(seed)) == text
    assert isinstance(char_noise(text, rate, random.Random(seed)), str)


def test_truncate_keeps_prefix():
    t = "one two three four five six seven eight"
    out = truncate_words(t, random.Random(0))
    assert t.startswith(out) and len(out.split()) < len(t.split())


def test_junk_titles_vary():
    rng = random.Random(4)
    kinds = {type(junk_title(rng)) for _ in range(100)}
    assert str in kinds
