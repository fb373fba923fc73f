import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pbanalogy.corpus import AlignedEntry
from pbanalogy.index import SubstringIndex

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent

# Segment frequencies for ``longevity`` with the word itself left out of NETtalk,
# as listed without the boundary phoneme (padded below).
_LONGEVITY_LISTING = {
    "#longe": {"lcGg-": 1},
    "#long": {"lcG-": 4, "lanJ": 2, "lcGg": 1},
    "#lon": {"lcG": 5, "lan": 2, "lon": 1},
    "nge": {"nJ-": 54, "nJx": 18, "Gg-": 12, "nJE": 9, "nJi": 9, "G--": 6, "NJ-": 3, "Ggx": 1, "n-i": 1},
    "ge": {"J-": 284, "Jx": 105, "JE": 80, "Ji": 40, "Z-": 26, "g-": 19, "--": 16, "gE": 11, "-x": 8,
           "gx": 6, "JI": 4, "gA": 3, "gi": 3, "Ze": 2, "-i": 1, "Ja": 1, "Za": 1, "gI": 1, "gY": 1,
           "ge": 1},
    "ev": {"Ev": 83, "Iv": 50, "iv": 36, "-v": 24, "xv": 15, "Ef": 1},
    "evi": {"ivi": 10, "Evx": 8, "IvA": 7, "Ev-": 3, "IvI": 3, "ivA": 3, "xvI": 3, "-vI": 2, "iv-": 2,
            "ivI": 2, "-v-": 1, "Evi": 1, "IvY": 1, "ivY": 1, "ivy": 1, "xvA": 1, "xvY": 1},
    "evity#": {"Evxti": 2},
    "vity#": {"vxti": 22},
    "ity#": {"xti": 421, "Iti": 2},
}


def _pad_listing(x, counts):
    pre = "#" if x.startswith("#") else ""
    post = "#" if x.endswith("#") else ""
    return {pre + y + post: c for y, c in counts.items()}


def substring_closed(table):
    """Add every missing sub-key with counts projected from its superstrings,
    as a real index would hold; listed keys keep their published counts."""
    out = {x: dict(d) for x, d in table.items()}
    extra: dict = {}
    for x, counts in table.items():
        for a in range(len(x)):
            for b in range(a + 1, len(x) + 1):
                z = x[a:b]
                if z in table:
                    continue
                for y, c in counts.items():
                    extra.setdefault(z, {}).setdefault(y[a:b], 0)
                    extra[z][y[a:b]] += c
    out.update(extra)
    return out


LONGEVITY_TABLE = substring_closed({x: _pad_listing(x, d) for x, d in _LONGEVITY_LISTING.items()})


def nettalk_path() -> Path | None:
    """Location of the real NETtalk file, if present."""
    env = os.environ.get("PBA_NETTALK")
    for p in ([Path(env)] if env else []) + [ROOT / "data" / "nettalk.data"]:
        if p.is_file():
            return p
    return None


@pytest.fixture
def longevity_view():
    return SubstringIndex.from_distributions(LONGEVITY_TABLE).view()


def entries(*pairs):
    return [AlignedEntry.from_strings(w, p) for w, p in pairs]


# small random aligned lexicons for property tests
LETTERS = "abc"
PHONES = "xyz-"


@st.composite
def aligned_pairs(draw, min_len=1, max_len=5):
    word = draw(st.text(LETTERS, min_size=min_len, max_size=max_len))
    pron = draw(st.text(PHONES, min_size=len(word), max_size=len(word)))
    return word, pron


def lexicons(min_size=1, max_size=12):
    return st.lists(aligned_pairs(), min_size=min_size, max_size=max_size).map(lambda ps: entries(*ps))


# -- acceptance summary -----------------------------------------------------------

ACCEPTANCE: dict[str, str] = {}


def record(key: str, ok: bool, text: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'}  {key}: {text}"
    ACCEPTANCE[key] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
