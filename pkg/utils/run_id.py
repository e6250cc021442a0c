"""
Run ID tracking for log correlation across a single command invocation.
"""
import uuid
from contextvars import ContextVar
from typing import Optional

_current_run_id: ContextVar[Optional[str]] = ContextVar("event_qe_run_id", default=None)


def generate_run_id():
    """Generate a unique run ID."""
    return f"run_{uuid.uuid4().hex[:16]}"


def get_run_id() -> Optional[str]:
    """Get the ID of the run currently executing, if any."""
    return _current_run_id.get()


def start_run(run_id: Optional[str] = None) -> str:
    """Open a new run, reusing ``run_id`` when the caller supplies one."""
    run_id = run_id or generate_run_id()
    _current_run_id.set(run_id)
    return run_id


def end_run():
    """Forget the current run ID."""
    _current_run_id.set(None)
