"""Shared definition of the shipped synthetic fixture (30 studies, 200 tests)."""

from pathlib import Path

from evidencelab import Dataset, generate_synthetic, parse_dataset

GOLDEN_DIR = Path(__file__).parent / "golden"
FIXTURE_CSV = GOLDEN_DIR / "fixture.csv"
GOLDEN_JSON = GOLDEN_DIR / "golden.json"

FIXTURE_ARGS = dict(
    seed=42,
    n_studies=30,
    tests_per_study=7,
    true_fraction=0.4,
    effect_d_true=0.4,
    n_range=(20, 200),
    total_tests=200,
)


def regenerate_fixture() -> Dataset:
    return generate_synthetic(**FIXTURE_ARGS)


def load_fixture() -> Dataset:
    return parse_dataset(FIXTURE_CSV.read_text(encoding="utf-8"))
