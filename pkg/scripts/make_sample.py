"""Regenerate the bundled sample corpus and title list under src/linkforge/data/."""
import argparse
from pathlib import Path

from linkforge.corpus import save_corpus
from linkforge.experiment import SAMPLE_SEED, SAMPLE_SIZE, TRAIN_SEED
from linkforge.synth import synthetic_clean_corpus

DATA = Path(__file__).resolve().parents[1] / "src" / "linkforge" / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    save_corpus(synthetic_clean_corpus(SAMPLE_SIZE, seed=SAMPLE_SEED), args.out / "sample_clean.jsonl")
    # good titles for TEM training come from an independent corpus
    titles = [r.title for r in synthetic_clean_corpus(SAMPLE_SIZE, seed=TRAIN_SEED, id_prefix="q")]
    (args.out / "sample_titles.txt").write_text("\n".join(titles) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
