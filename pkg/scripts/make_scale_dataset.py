#!/usr/bin/env python3
"""Generate a synthetic dataset bundle for load and latency checks.

The output is deliberately boring: a two-level taxonomy, numbered noun
concepts and a deterministic pseudo-random relation graph.  It exists to
show headroom well past desk scale, not to look like real dictionary data.

Usage:
    python scripts/make_scale_dataset.py --out /tmp/scale --concepts 100000 --relations 200000
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from konsepta.ingest import SCHEMA_VERSION  # noqa: E402


def build_texts(n_concepts: int, n_relations: int, n_categories: int, seed: int) -> dict[str, str]:
    rng = random.Random(seed)

    taxonomy = [f"{SCHEMA_VERSION}\ttaxonomy", "syn"]
    taxonomy += [f"syn/oblast{c:03d}" for c in range(n_categories)]

    keys = []
    concepts = [f"{SCHEMA_VERSION}\tconcepts"]
    for i in range(n_concepts):
        key = f"syn/oblast{i % n_categories:03d}/heslo{i:06d}"
        keys.append(key)
        gender = ("m", "f", "n")[i % 3]
        concepts.append(f"{key}\tword\tnoun\t{gender}\t-\t-")

    relation_types = [
        f"{SCHEMA_VERSION}\trelation_types",
        "synonym\t1\t-",
        "hypernym\t0\thyponym",
        "hyponym\t0\thypernym",
        "related\t1\t-",
    ]

    relations = [f"{SCHEMA_VERSION}\trelations"]
    seen = set()
    type_cycle = ("hypernym", "related", "synonym")
    while len(seen) < n_relations:
        a = rng.randrange(n_concepts)
        b = rng.randrange(n_concepts)
        if a == b:
            continue
        type_name = type_cycle[len(seen) % len(type_cycle)]
        if type_name != "hypernym" and a > b:
            a, b = b, a  # symmetric edges store one orientation
        edge = (a, b, type_name)
        if edge in seen:
            continue
        seen.add(edge)
        relations.append(f"{keys[a]}\t{keys[b]}\t{type_name}")

    forms = [f"{SCHEMA_VERSION}\tforms"]
    return {
        "taxonomy": "\n".join(taxonomy) + "\n",
        "concepts": "\n".join(concepts) + "\n",
        "relation_types": "\n".join(relation_types) + "\n",
        "relations": "\n".join(relations) + "\n",
        "forms": "\n".join(forms) + "\n",
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output bundle directory")
    parser.add_argument("--concepts", type=int, default=100_000)
    parser.add_argument("--relations", type=int, default=200_000)
    parser.add_argument("--categories", type=int, default=160)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    texts = build_texts(args.concepts, args.relations, args.categories, args.seed)
    for kind, text in texts.items():
        (out / f"{kind}.tsv").write_text(text, encoding="utf-8")
    print(f"wrote {args.concepts} concepts, {args.relations} relations to {out}")


if __name__ == "__main__":
    main()
