import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, Optional

import aiofiles
from pythonjsonlogger.json import JsonFormatter

from sparsebvar.config.settings import settings


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None, json_logs: Optional[bool] = None):
    """Setup Python's built-in logging system: JSON lines to a daily file, plain text to stderr"""
    log_dir = log_dir or settings.LOG_DIR
    level = (level or settings.LOG_LEVEL).upper()
    json_logs = settings.LOG_JSON if json_logs is None else json_logs
    os.makedirs(log_dir, exist_ok=True)

    log_file = os.path.join(
        log_dir,
        f"sparsebvar_{datetime.now().strftime('%Y%m%d')}.log"
    )

    file_handler = logging.FileHandler(log_file)
    if json_logs:
        file_handler.setFormatter(JsonFormatter(
            "%(asctime)s %(name)s %(levelname)s %(message)s",
            rename_fields={"levelname": "level", "asctime": "timestamp"},
        ))
    else:
        file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))

    logging.basicConfig(level=level, handlers=[file_handler, console_handler], force=True)

    logger = logging.getLogger(__name__)
    logger.info("Logging system initialized", extra={"log_file": log_file})
    return logger


class RunLogger:
    """JSON-lines event log for one CLI run, with a per-run file under LOG_DIR/runs"""

    def __init__(self, run_id: str, log_dir: Optional[str] = None):
        self.run_id = run_id
        self.log_dir = os.path.join(log_dir or settings.LOG_DIR, "runs")
        os.makedirs(self.log_dir, exist_ok=True)
        self.log_file = os.path.join(self.log_dir, f"run_{run_id}.log")

    async def log_event(
        self,
        message: str,
        event_type: str = "info",
        metadata: Optional[Dict[str, Any]] = None
    ):
        """Append one event to the run log"""
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "type": event_type,
            "message": message,
            "metadata": metadata or {}
        }

        async with aiofiles.open(self.log_file, 'a') as f:
            await f.write(json.dumps(log_entry, default=str) + "\n")

    async def log_task_event(
        self,
        label: str,
        index: Any,
        status: str,
        metadata: Optional[Dict[str, Any]] = None
    ):
        """Log completion or failure of one task of a parallel batch"""
        await self.log_event(
            f"{label} task {index} {status}",
            "task" if status == "completed" else "error",
            {**(metadata or {}), "label": label, "index": index}
        )
