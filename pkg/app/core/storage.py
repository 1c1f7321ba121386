import json
import os
import shutil

from app.core.config import settings
from app.core.security import generate_run_id, safe_run_path
from app.models.schemas import ProcessingStatus, RunRecord, StatusEnum

# In-memory mapping: run_id -> ProcessingStatus
_status_store: dict[str, ProcessingStatus] = {}


def _status_dir() -> str:
    return os.path.join(settings.data_dir, "statuses")


def _ensure_data_dir() -> None:
    os.makedirs(settings.data_dir, exist_ok=True)


async def save_record(record: RunRecord) -> str:
    _ensure_data_dir()
    if not record.run_id:
        record.run_id = generate_run_id()
    path = safe_run_path(settings.data_dir, record.run_id)
    if path is None:
        raise ValueError(f"run_id failed validation: {record.run_id}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(record.model_dump_json(indent=2))
    return record.run_id


async def load_record(run_id: str) -> RunRecord | None:
    path = safe_run_path(settings.data_dir, run_id)
    if path is None:
        return None
    if not os.path.isfile(path):
        return None
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return RunRecord(**data)


async def set_status(run_id: str, status: StatusEnum, error_message: str | None = None) -> ProcessingStatus:
    ps = ProcessingStatus(run_id=run_id, status=status, error_message=error_message)
    _status_store[run_id] = ps
    os.makedirs(_status_dir(), exist_ok=True)
    path = os.path.join(_status_dir(), f"{run_id}.json")
    with open(path, "w", encoding="utf-8") as f:
        f.write(ps.model_dump_json(indent=2))
    return ps


async def get_status(run_id: str) -> ProcessingStatus | None:
    if run_id in _status_store:
        return _status_store[run_id]
    if safe_run_path(settings.data_dir, run_id) is None:
        return None
    path = os.path.join(_status_dir(), f"{run_id}.json")
    if os.path.isfile(path):
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        ps = ProcessingStatus(**data)
        _status_store[run_id] = ps
        return ps
    return None


def clear_all_statuses() -> None:
    """Clear in-memory status cache and status files (for testing)."""
    _status_store.clear()
    if os.path.isdir(_status_dir()):
        shutil.rmtree(_status_dir())
