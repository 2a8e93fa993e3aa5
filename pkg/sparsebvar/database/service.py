import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

from sqlalchemy import desc, select, update
from sqlalchemy.exc import SQLAlchemyError

from .connection import get_db, init_db
from .models import Run, RunStatus

logger = logging.getLogger(__name__)


class RunService:
    """Run registry. Every method is a no-op when the registry is disabled or unreachable."""

    def __init__(self, url: Optional[str] = None):
        self.url = url
        try:
            self.enabled = init_db(url)
        except SQLAlchemyError as exc:
            logger.warning(f"Run registry unavailable: {exc}")
            self.enabled = False

    def create_run(self, run_id: str, command: str, config: Dict[str, Any], seed: int,
                   output_dir: str, data_hash: Optional[str] = None) -> Optional[str]:
        if not self.enabled:
            return None
        try:
            with get_db(self.url) as db:
                db.add(Run(
                    run_id=run_id,
                    command=command,
                    config=config,
                    seed=str(seed),
                    output_dir=output_dir,
                    data_hash=data_hash,
                    status=RunStatus.RUNNING,
                    started_at=datetime.utcnow(),
                ))
            return run_id
        except SQLAlchemyError as exc:
            logger.warning(f"Could not register run {run_id}: {exc}")
            return None

    def _finish(self, run_id: str, status: RunStatus, **values):
        if not self.enabled:
            return
        try:
            with get_db(self.url) as db:
                db.execute(
                    update(Run)
                    .where(Run.run_id == run_id)
                    .values(status=status, ended_at=datetime.utcnow(), **values)
                )
        except SQLAlchemyError as exc:
            logger.warning(f"Could not update run {run_id}: {exc}")

    def complete_run(self, run_id: str, summary: Optional[Dict[str, Any]] = None,
                     data_hash: Optional[str] = None):
        values: Dict[str, Any] = {"summary": summary or {}}
        if data_hash is not None:
            values["data_hash"] = data_hash
        self._finish(run_id, RunStatus.COMPLETED, **values)

    def fail_run(self, run_id: str, error: str):
        self._finish(run_id, RunStatus.FAILED, error=error)

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        if not self.enabled:
            return None
        with get_db(self.url) as db:
            run = db.execute(select(Run).where(Run.run_id == run_id)).scalar_one_or_none()
            return self._to_dict(run) if run else None

    def list_runs(self, limit: int = 20) -> List[Dict[str, Any]]:
        if not self.enabled:
            return []
        with get_db(self.url) as db:
            runs = db.execute(select(Run).order_by(desc(Run.id)).limit(limit)).scalars().all()
            return [self._to_dict(run) for run in runs]

    @staticmethod
    def _to_dict(run: Run) -> Dict[str, Any]:
        return {
            "run_id": run.run_id,
            "command": run.command,
            "status": run.status.value if run.status else None,
            "seed": run.seed,
            "output_dir": run.output_dir,
            "data_hash": run.data_hash,
            "summary": run.summary,
            "error": run.error,
        }
