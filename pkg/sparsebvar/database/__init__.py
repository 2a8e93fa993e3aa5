from .connection import get_db, get_engine, init_db
from .models import Base, Run, RunStatus
from .service import RunService

__all__ = [
    'Base',
    'Run',
    'RunStatus',
    'RunService',
    'get_db',
    'get_engine',
    'init_db'
]
