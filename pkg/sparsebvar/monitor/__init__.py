from .log import RunLogger, setup_logging
from .resource import ResourceMonitor, default_workers

__all__ = ['ResourceMonitor', 'RunLogger', 'default_workers', 'setup_logging']
