from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Union
from pathlib import Path
from threading import Lock
import json

@dataclass(frozen=True)
class AgentTranscript:
    page_id: int
    attempt: int
    prompt: str
    response_text: Optional[str]
    parse_outcome: str
    validator_outcome: str
    latency_ms: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

class TranscriptSink:
    """
    Append-only record of every agent attempt. Optionally mirrored to a JSONL
    file; the lock is the only state shared between page workers.
    """
    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self._records: List[AgentTranscript] = []
        self._lock = Lock()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def append(self, record: AgentTranscript) -> None:
        with self._lock:
            self._records.append(record)
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as out:
                    out.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    @property
    def records(self) -> List[AgentTranscript]:
        with self._lock:
            return list(self._records)

    def for_page(self, page_id) -> List[AgentTranscript]:
        return [r for r in self.records if r.page_id == page_id]

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

def read_transcripts(path: Union[str, Path]) -> List[AgentTranscript]:
    with open(path, "r", encoding="utf-8") as data:
        return [AgentTranscript(**json.loads(line)) for line in data if line.strip()]
