from .manager import RunManager, run_tasks

__all__ = ['RunManager', 'run_tasks']
