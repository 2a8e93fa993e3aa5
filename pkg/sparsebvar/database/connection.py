import logging
from contextlib import contextmanager
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker

from sparsebvar.config.settings import settings

from .models import Base

logger = logging.getLogger(__name__)

_engine: Optional[Engine] = None
_session_factory: Optional[sessionmaker] = None


def get_engine(url: Optional[str] = None) -> Optional[Engine]:
    """Engine for the run registry; None when DATABASE_URL is empty"""
    global _engine, _session_factory
    url = settings.DATABASE_URL if url is None else url
    if not url:
        return None
    if _engine is None or str(_engine.url) != url:
        if url.startswith("postgres://"):
            url = url.replace("postgres://", "postgresql://", 1)
        _engine = create_engine(url, echo=False, pool_pre_ping=True)
        _session_factory = sessionmaker(autocommit=False, autoflush=False, bind=_engine,
                                        expire_on_commit=False)
    return _engine


def init_db(url: Optional[str] = None) -> bool:
    engine = get_engine(url)
    if engine is None:
        logger.info("Run registry disabled (no DATABASE_URL)")
        return False
    Base.metadata.create_all(bind=engine)
    logger.debug("Run registry tables ready", extra={"url": str(engine.url)})
    return True


@contextmanager
def get_db(url: Optional[str] = None):
    if get_engine(url) is None or _session_factory is None:
        yield None
        return

    db = _session_factory()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()
