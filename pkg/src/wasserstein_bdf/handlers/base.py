"""Base handler for wasserstein-bdf subcommands."""

from typing import Any, Dict, List

from pydantic import BaseModel, Field


class CheckReport(BaseModel):
    """Outcome of an acceptance check."""

    passed: bool = Field(..., description="True when no check failed")
    failures: List[str] = Field(default_factory=list, description="Failed checks")

    @classmethod
    def from_failures(cls, failures: List[str]) -> "CheckReport":
        return cls(passed=not failures, failures=failures)


class BaseHandler:
    """Base class for handlers."""

    name: str = ""
    description: str = ""

    def run(self, arguments: Dict[str, Any]) -> Any:
        """Execute the subcommand with given arguments."""
        raise NotImplementedError
