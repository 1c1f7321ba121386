import re
import uuid
from pathlib import Path

_UUID4_PATTERN = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}$",
    re.IGNORECASE,
)


def generate_run_id() -> str:
    """Generate a cryptographically random UUID4 run_id."""
    return str(uuid.uuid4())


def validate_run_id(run_id: str) -> bool:
    """Validate that a run_id is a proper UUID4 format. Prevents directory traversal."""
    return bool(_UUID4_PATTERN.match(run_id))


def safe_run_path(data_dir: str, run_id: str) -> str | None:
    """Build a safe file path for run_id, preventing directory traversal.

    Returns None if the ID is invalid.
    """
    if not validate_run_id(run_id):
        return None
    base = Path(data_dir).resolve()
    target = (base / f"{run_id}.json").resolve()
    if not target.is_relative_to(base):
        return None
    return str(target)


def safe_input_path(root_dir: str, relative: str) -> str | None:
    """Resolve a graph file under root_dir; None if it escapes the directory or does not exist."""
    base = Path(root_dir).resolve()
    target = (base / relative).resolve()
    if not target.is_relative_to(base) or not target.is_file():
        return None
    return str(target)
