from decouple import config
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # App Configuration
    app_name: str = "CDPA Lab"
    app_version: str = "1.0.0"
    environment: str = config("ENVIRONMENT", default="development")

    # Logging
    log_level: str = config("LOG_LEVEL", default="INFO")
    log_file: str = config("LOG_FILE", default="")

    # Output Configuration
    default_output_dir: str = config("OUTPUT_DIR", default="results")
    csv_float_format: str = config("CSV_FLOAT_FORMAT", default="%.17g")

    # Sweep Execution
    sweep_workers: int = config("SWEEP_WORKERS", cast=int, default=1)
    monitor_window_size: int = config("MONITOR_WINDOW_SIZE", cast=int, default=100)

    model_config = SettingsConfigDict(
        case_sensitive=False,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def get_logging_config(self) -> dict:
        """Get logging configuration"""
        return {
            "level": self.log_level.upper(),
            "file": self.log_file or None,
        }


# Global settings instance
settings = Settings()
