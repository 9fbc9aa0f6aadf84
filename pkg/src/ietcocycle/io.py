"""Config files, Zorich orbit streams and small serialisation helpers."""
import json
import os
from fractions import Fraction
from typing import Iterator

import yaml

from .combinatorics import Permutation
from .renorm import SimplexSampler, zorich_step


def load_config(path: str) -> dict:
    """Keyed config from a ``.json``, ``.yaml`` or ``.yml`` file. Keys use
    underscores; dashes are accepted and converted."""
    with open(path) as fh:
        text = fh.read()
    ext = os.path.splitext(path)[1].lower()
    data = json.loads(text) if ext == ".json" else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def perm_text(perm: Permutation) -> str:
    return " ".join(map(str, perm.top)) + " / " + " ".join(map(str, perm.bottom))


def zorich_records(lengths, perm: Permutation, n: int) -> Iterator[dict]:
    """One record per Zorich step: index, type pattern (``t^3`` is three
    top-type Rauzy steps), the step matrix row-major as decimal strings and
    the lengths before the step."""
    lam, pi = list(lengths), perm
    for i in range(n):
        st = zorich_step(lam, pi)
        yield {
            "step": i,
            "pattern": f"{st.kind[0]}^{st.rauzy_count}",
            "perm": perm_text(pi),
            "matrix": [str(x) for row in st.matrix for x in row],
            "lengths": [str(x) for x in lam],
        }
        lam, pi = list(st.next_lambda), st.next_perm


def seeded_orbit(perm: Permutation, n: int, seed: int, bits: int = 256) -> Iterator[dict]:
    lam = SimplexSampler(perm.d, seed, 0).lengths(bits)
    return zorich_records(lam, perm, n)


def write_jsonl(records, fh) -> int:
    count = 0
    for rec in records:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")
        count += 1
    return count


def read_jsonl(path: str) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def parse_fraction_list(text: str) -> list:
    """``"1/3,2/3"`` or ``"0.25 0.75"`` as exact fractions."""
    parts = text.replace(",", " ").split()
    return [Fraction(x) for x in parts]


def parse_int_list(text: str) -> list:
    return [int(x) for x in text.replace(",", " ").split()]
