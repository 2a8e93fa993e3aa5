from datetime import datetime
from typing import Any, Dict

import psutil

from sparsebvar.config.settings import settings
from sparsebvar.utils import format_bytes


def default_workers(requested: int = 0) -> int:
    """Worker count: explicit request, else WORKERS setting, else logical cores"""
    if requested and requested > 0:
        return requested
    if settings.WORKERS > 0:
        return settings.WORKERS
    return psutil.cpu_count(logical=True) or 1


class ResourceMonitor:
    """Snapshot of system resources recorded at run boundaries"""

    def get_system_resources(self) -> Dict[str, Any]:
        """Get overall system resource usage"""
        memory = psutil.virtual_memory()
        process = psutil.Process()

        return {
            "cpu": round(psutil.cpu_percent(interval=None), 1),
            "cpu_count": psutil.cpu_count(),
            "memory": round(memory.percent, 1),
            "memory_available": format_bytes(memory.available),
            "process_rss": format_bytes(process.memory_info().rss),
            "timestamp": datetime.now().isoformat()
        }
