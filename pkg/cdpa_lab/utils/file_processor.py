import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd
from pydantic import BaseModel

from config import settings
from ..exceptions import OutputError

logger = logging.getLogger(__name__)


class FileProcessor:
    """Writes experiment artifacts as plain CSV and JSON"""

    def __init__(self, float_format: str = None):
        self.float_format = float_format or settings.csv_float_format

    def prepare_output_dir(self, directory: Union[str, Path, None]) -> Path:
        """Create the output directory if needed and make sure it is writable"""
        path = Path(directory or settings.default_output_dir)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {path}: {e}") from e
        if not path.is_dir() or not os.access(path, os.W_OK):
            raise OutputError(f"Output directory {path} is not writable")
        return path

    def write_frame(self, df: pd.DataFrame, path: Union[str, Path]) -> Path:
        """CSV with full double precision and '\\n' line endings"""
        path = Path(path)
        try:
            df.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        logger.debug(f"Wrote {len(df)} rows to {path}")
        return path

    def to_document(self, payload: Union[BaseModel, Dict[str, Any], list]) -> Any:
        """JSON-ready form of payload; NaN and infinities become null"""
        if isinstance(payload, BaseModel):
            return self.to_document(payload.model_dump(mode="json"))
        if isinstance(payload, float) and not math.isfinite(payload):
            return None
        if isinstance(payload, (list, tuple)):
            return [self.to_document(item) for item in payload]
        if isinstance(payload, dict):
            return {key: self.to_document(value) for key, value in payload.items()}
        return payload

    def write_json(self, payload: Union[BaseModel, Dict[str, Any], list], path: Union[str, Path]) -> Path:
        """Sorted, indented JSON so reruns are byte-identical"""
        path = Path(path)
        text = json.dumps(self.to_document(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        logger.debug(f"Wrote {path}")
        return path


file_processor = FileProcessor()
