import enum

from sqlalchemy import Column, DateTime, Enum as SQLEnum, Integer, JSON, String, Text
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func

Base = declarative_base()


class RunStatus(enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class Run(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(64), unique=True, nullable=False, index=True)
    command = Column(String(32), nullable=False)
    status = Column(SQLEnum(RunStatus), default=RunStatus.PENDING)

    seed = Column(String(32), nullable=True)
    output_dir = Column(String(1024), nullable=True)
    config = Column(JSON, default=dict)
    data_hash = Column(String(64), nullable=True)
    summary = Column(JSON, default=dict)
    error = Column(Text, nullable=True)

    started_at = Column(DateTime, nullable=True)
    ended_at = Column(DateTime, nullable=True)
    created_at = Column(DateTime, server_default=func.now())
    updated_at = Column(DateTime, server_default=func.now(), onupdate=func.now())
