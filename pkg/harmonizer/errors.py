from typing import Iterable, List, Optional, Sequence, Union

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_AGENT = 3

class HarmonizerError(Exception):
    exit_code = EXIT_DATA

class ConfigError(HarmonizerError):
    exit_code = EXIT_USAGE

class UsageError(ConfigError):
    pass

class DataError(HarmonizerError):
    exit_code = EXIT_DATA

class CocoParseError(DataError):
    def __init__(self, path: str, offset: int, reason: str):
        self.path, self.offset, self.reason = str(path), offset, reason
        super().__init__(f"Malformed JSON in {path} at byte {offset}: {reason}")

class CocoStructureError(DataError):
    def __init__(self, message: str, ids: Iterable[Union[int, str]] = ()):
        self.ids = list(ids)
        if self.ids:
            message = f"{message} (annotation ids: {', '.join(str(i) for i in self.ids)})"
        super().__init__(message)

class RemapError(DataError):
    def __init__(self, category: str, mapping_name: str = ""):
        self.category = category
        where = f" in mapping '{mapping_name}'" if mapping_name else ""
        super().__init__(f"Unmapped category '{category}'{where}")

class CategoryNotFoundError(DataError, KeyError):
    def __init__(self, category: str):
        self.category = category
        DataError.__init__(self, f"Category '{category}' not present in dataset")

    def __str__(self) -> str:
        return DataError.__str__(self)

class DegenerateStatsError(DataError):
    pass

class DegenerateInputError(DataError):
    pass

class EmbeddingInputError(DataError):
    def __init__(self, message: str, row: Optional[int] = None, record_id=None):
        self.row, self.record_id = row, record_id
        if row is not None:
            message = f"Row {row}" + (f" (id {record_id})" if record_id is not None else "") + f": {message}"
        super().__init__(message)

class EvaluationInputError(DataError):
    pass

class PlanParseError(DataError):
    def __init__(self, reason: str, fragment: str = ""):
        self.reason, self.fragment = reason, fragment
        shown = fragment if len(fragment) <= 200 else fragment[:197] + "..."
        super().__init__(f"{reason}: {shown!r}" if fragment else reason)

class PlanContractError(DataError):
    def __init__(self, violations: Sequence["object"]):
        self.violations = list(violations)
        super().__init__("Plan rejected: " + "; ".join(str(v) for v in self.violations))

class AgentError(HarmonizerError):
    exit_code = EXIT_AGENT

class TransportError(AgentError):
    def __init__(self, message: str, status: Optional[int] = None):
        self.status = status
        super().__init__(message)

class GroundingError(AgentError):
    def __init__(self, path: Optional[str], reason: str = "page image not readable"):
        self.path = path
        super().__init__(f"Refusing ungrounded request, {reason}: {path}")

class AgentExhaustedError(AgentError):
    def __init__(self, page_id, attempts: int, reasons: List[str]):
        self.page_id, self.attempts, self.reasons = page_id, attempts, list(reasons)
        last = reasons[-1] if reasons else "unknown"
        super().__init__(f"Agent gave up on page {page_id} after {attempts} attempt(s); last failure: {last}")

class HarmonizationJobError(HarmonizerError):
    exit_code = EXIT_AGENT

    def __init__(self, page_id, reason: str):
        self.page_id, self.reason = page_id, reason
        super().__init__(f"Job failed on page {page_id}: {reason}")

def exit_code_for(err: BaseException) -> int:
    """Exit code of a failed run; OSError and anything unexpected count as data errors."""
    return err.exit_code if isinstance(err, HarmonizerError) else EXIT_DATA
