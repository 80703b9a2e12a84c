from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    log_level: str = Field(default="INFO", alias="GFD_LOG_LEVEL")
    default_seed: int = Field(default=0, alias="GFD_SEED")
    output_dir: Path = Field(default=Path("."), alias="GFD_OUTPUT_DIR")

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = Settings()
