import os

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SPARSEBVAR_", env_file=".env", extra="ignore")

    # Directory Configuration
    DATA_DIR: str = "./data"
    LOG_DIR: str = "./logs"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = True

    # Run registry; empty string disables it
    DATABASE_URL: str = "sqlite:///./sparsebvar_runs.db"

    # 0 = all available cores
    WORKERS: int = 0

    # Numerics
    GRAM_CONDITION_LIMIT: float = 1e12

    def manifest_path(self) -> str:
        """Default variable manifest shipped with the data directory"""
        return os.path.join(self.DATA_DIR, "fredqd_manifest.csv")


settings = Settings()
