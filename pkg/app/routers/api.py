from fastapi import APIRouter, BackgroundTasks, HTTPException

from app.core.config import settings
from app.core.pipeline import process_run_request
from app.core.security import generate_run_id, safe_input_path
from app.core.storage import get_status, load_record, set_status
from app.models.schemas import ProcessingStatus, RunRecord, RunRequest, StatusEnum

router = APIRouter(prefix="/api", tags=["api"])


@router.post("/runs", status_code=202)
async def create_run(request: RunRequest, background_tasks: BackgroundTasks) -> dict[str, str]:
    graph_path = safe_input_path(settings.fixtures_dir, request.graph_path)
    if graph_path is None:
        raise HTTPException(status_code=422, detail="graph_path must name a file inside the fixtures directory")

    run_id = generate_run_id()
    resolved = request.model_copy(update={"graph_path": graph_path, "graph_id": request.graph_id or request.graph_path})
    await set_status(run_id, StatusEnum.pending)
    background_tasks.add_task(process_run_request, run_id, resolved)
    return {"status": "pending", "run_id": run_id}


@router.get("/status/{run_id}")
async def get_processing_status(run_id: str) -> ProcessingStatus:
    status = await get_status(run_id)
    if status is None:
        raise HTTPException(status_code=404, detail="Status not found")
    return status


@router.get("/runs/{run_id}")
async def get_run(run_id: str) -> RunRecord:
    record = await load_record(run_id)
    if record is None:
        raise HTTPException(status_code=404, detail="Run not found")
    return record
