"""Built-in example models shipped as ``.tlp`` resources.

Each entry parses, round-trips through the pretty-printer, and recognizes
into a lifecycle model; they double as test fixtures and demo content.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    title: str
    description: str
    program: str


_ENTRIES: tuple[tuple[str, str, str], ...] = (
    (
        "sample_network",
        "Sample task network",
        "Four tasks over five artifacts for one component; task4 can start "
        "from any one of three alternative artifacts.",
    ),
    (
        "mase_fragment",
        "MaSE fragment",
        "Opening task of the MaSE agent-oriented methodology life-cycle.",
    ),
    (
        "mascommonkads_fragment",
        "MASCommonKADS fragment",
        "Agent-model task of the MASCommonKADS life-cycle, with two "
        "alternative ways to produce the agent model.",
    ),
)


class UnknownCorpusError(KeyError):
    pass


def _load(entry_id: str) -> str:
    return (
        resources.files(__package__).joinpath(f"{entry_id}.tlp").read_text("utf-8")
    )


def list_corpus() -> list[CorpusEntry]:
    """All entries, in a fixed order, with program text included."""
    return [
        CorpusEntry(entry_id, title, description, _load(entry_id))
        for entry_id, title, description in _ENTRIES
    ]


def get_corpus(entry_id: str) -> CorpusEntry:
    for entry_id_, title, description in _ENTRIES:
        if entry_id_ == entry_id:
            return CorpusEntry(entry_id, title, description, _load(entry_id))
    raise UnknownCorpusError(entry_id)
