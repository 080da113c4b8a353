import json
import os
import shutil
from datetime import datetime
from typing import Any, Dict, Optional, Tuple


def now_iso() -> str:
    return datetime.utcnow().replace(microsecond=0).isoformat() + "Z"


# census sizes established by the enumerator and the oracle; (n, dualize) -> flows
PINNED_COUNTS: Dict[Tuple[int, bool], int] = {
    (0, False): 1,
    (0, True): 1,
    (1, False): 4,
    (1, True): 3,
    (2, False): 19,
    (2, True): 12,
    (3, False): 146,
    (3, True): 79,
    (4, False): 1033,
    (5, False): 7121,
}


def census_key(n: int, dualize: bool) -> str:
    return f"census:n={n}:dualize={'true' if dualize else 'false'}"


class GoldenLedger:
    """
    Persistent record of census counts.
    A count is recorded the first time the enumerator and the oracle agree;
    later runs are compared against it.
    """

    def __init__(self, path: str = "golden_counts.json"):
        self.path = path
        self.data: Dict[str, Any] = {"counts": {}, "notes": []}
        self._load()

    def _load(self) -> None:
        if not os.path.exists(self.path):
            return
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                self.data = json.load(f)
        except Exception:
            backup = self.path + ".bak"
            shutil.copy(self.path, backup)
            self.data = {"counts": {}, "notes": [{"ts": now_iso(), "msg": f"Ledger reset; backup at {backup}"}]}

    def save(self) -> None:
        parent = os.path.dirname(self.path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(self.data, f, indent=2, sort_keys=True)

    def get_record(self, key: str) -> Optional[Dict[str, Any]]:
        return self.data.get("counts", {}).get(key)

    def upsert_record(self, key: str, record: Dict[str, Any]) -> None:
        self.data.setdefault("counts", {})[key] = record
        self.save()

    def check_census(self, n: int, dualize: bool, enumerated: int, oracle: Optional[int] = None) -> Dict[str, Any]:
        """
        Compare a census count with the oracle, the pinned count and the recorded golden number.
        Returns {"status": "recorded" | "match" | "mismatch" | "unchecked", "golden": int | None}.
        """
        key = census_key(n, dualize)
        record = self.get_record(key)
        golden = PINNED_COUNTS.get((n, dualize), None if record is None else record["count"])
        if oracle is not None and enumerated != oracle:
            return {"status": "mismatch", "golden": golden}
        if golden is not None and golden != enumerated:
            return {"status": "mismatch", "golden": golden}
        if record is None:
            if oracle is None and golden is None:
                return {"status": "unchecked", "golden": None}
            self.upsert_record(key, {"count": enumerated, "recorded_at": now_iso()})
            return {"status": "recorded", "golden": enumerated}
        return {"status": "match", "golden": golden}
