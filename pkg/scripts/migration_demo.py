#!/usr/bin/env python3
"""Demo pipeline: find country references in text, direct and indirect.

Slovak news rarely names a country outright; it shows up through city names,
lower-case derived adjectives ("bratislavský primátor") or demonyms
("Slovenka").  The pipeline extracts concepts from the text, then walks
located-in / adjective-of / demonym-of relations to the country concepts
they point at.

Usage:
    python scripts/migration_demo.py ["some Slovak text"]
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from konsepta import DatasetBundle, Store, extract, fixture_dir, load_dataset  # noqa: E402

SAMPLE = (
    "Bratislavský primátor privítal Slovenku, ktorá sa po rokoch v New Yorku "
    "vrátila do Košíc."
)

# Relation readings that lead from a mention towards a place, then upward.
TOWARDS_PLACE = ("adjective-of", "demonym-of", "located-in", "instance-of")
COUNTRY_CATEGORY = ("miesto", "krajina")


def countries_for(snap, key: str, max_hops: int = 3) -> set[str]:
    frontier = {key}
    seen = {key}
    found = set()
    for _ in range(max_hops):
        nxt = set()
        for node in frontier:
            concept = snap.get(node)
            if concept and concept.key.path[: len(COUNTRY_CATEGORY)] == COUNTRY_CATEGORY:
                found.add(node)
            for label, other in snap.neighbors(node):
                if label in TOWARDS_PLACE and other not in seen:
                    seen.add(other)
                    nxt.add(other)
        frontier = nxt
    return found


def main() -> None:
    text = sys.argv[1] if len(sys.argv) > 1 else SAMPLE
    store = Store()
    report = load_dataset(DatasetBundle.read_dir(fixture_dir()), store)
    assert report.rejected == 0
    snap = store.snapshot()

    print(f"text: {text}\n")
    hits: dict[str, set[str]] = {}
    for annotation in extract(text, snap):
        if annotation.chosen is None:
            continue
        countries = countries_for(snap, annotation.chosen)
        print(f"  [{annotation.start:>3},{annotation.end:>3})  {annotation.surface!r:<18} -> {annotation.chosen}")
        for country in sorted(countries):
            hits.setdefault(country, set()).add(annotation.surface)

    print("\ncountry references:")
    if not hits:
        print("  (none)")
    for country, via in sorted(hits.items()):
        print(f"  {country}  via {', '.join(sorted(via))}")


if __name__ == "__main__":
    main()
