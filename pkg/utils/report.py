"""
LinAmalg reports
One record per command, printed as text or as a JSON line
"""

import logging
from typing import Any, Dict, Literal, Optional

import ujson
from pydantic import BaseModel, Field

from utils.exceptions import BudgetExceededException, ExceptionHandler, LinAmalgException

logger = logging.getLogger(__name__)

Verdict = Literal["ok", "refuted", "error", "budget"]

VERDICT_EXIT_CODES: Dict[str, int] = {
    "ok": 0,
    "refuted": 1,
    "budget": 3
}


class ReportRecord(BaseModel):
    """Outcome of one CLI command"""

    command: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    verdict: Verdict = "ok"
    witness_file: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    exit_code: int = 0

    @classmethod
    def success(cls, command: str, inputs: Dict[str, Any], **details) -> "ReportRecord":
        return cls(command=command, inputs=inputs, verdict="ok", details=details)

    @classmethod
    def refuted(cls, command: str, inputs: Dict[str, Any], **details) -> "ReportRecord":
        return cls(command=command, inputs=inputs, verdict="refuted", details=details,
                   exit_code=VERDICT_EXIT_CODES["refuted"])

    @classmethod
    def from_exception(cls, command: str, inputs: Dict[str, Any], e: Exception) -> "ReportRecord":
        """Error record carrying the exception's exit code"""
        info = ExceptionHandler.handle_exception(e)
        verdict = "budget" if isinstance(e, BudgetExceededException) else "error"
        details = {"error_code": info["error_code"], "message": ExceptionHandler.get_user_friendly_message(e)}
        if isinstance(e, LinAmalgException) and e.details:
            details["context"] = e.details
        return cls(command=command, inputs=inputs, verdict=verdict, details=details,
                   exit_code=info["exit_code"])

    def to_json(self) -> str:
        return ujson.dumps(self.model_dump(), ensure_ascii=False, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.verdict}"]
        for key, value in self.details.items():
            if isinstance(value, (list, tuple)):
                lines.append(f"  {key}:")
                lines += [f"    {item}" for item in value]
            else:
                lines.append(f"  {key}: {value}")
        if self.witness_file:
            lines.append(f"  witness: {self.witness_file}")
        return "\n".join(lines)

    def render(self, fmt: str = "text") -> str:
        return self.to_json() if fmt == "json" else self.to_text()
