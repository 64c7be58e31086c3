from __future__ import annotations

import json
from pathlib import Path

import pytest

from qreform.corpus import Engagement, SessionEvent

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_DIR = REPO_ROOT / "configs" / "demo"
BUCKET_FIXTURE_DIR = Path(__file__).resolve().parent / "data" / "intent_buckets"


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return DEMO_DIR


@pytest.fixture(scope="session")
def bucket_fixture_dir() -> Path:
    return BUCKET_FIXTURE_DIR


@pytest.fixture(scope="session")
def bucket_fixture_doc() -> dict:
    return json.loads((BUCKET_FIXTURE_DIR / "pairs.json").read_text())


def make_event(session_id: str, ts: int, query: str, category: str = "leaf",
               clicks: int = 0, signals: tuple[tuple[str, str], ...] = ()) -> SessionEvent:
    """Test helper: event with n clicks on items c0..c{n-1} plus explicit signals."""
    engagements = tuple(Engagement(f"{session_id}-c{i}", "click") for i in range(clicks))
    engagements += tuple(Engagement(item, signal) for item, signal in signals)
    return SessionEvent.build(session_id, ts, query, category, engagements)
