import csv
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

from app.core.config import settings

# Setup basic Python logger for console
logger = logging.getLogger("segbuf")
logger.setLevel(logging.INFO)
if not logger.handlers:
    ch = logging.StreamHandler()
    ch.setLevel(logging.INFO)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    ch.setFormatter(formatter)
    logger.addHandler(ch)

class ActivityLogger:
    def __init__(self, log_dir: Optional[Path] = None, enabled: Optional[bool] = None):
        """Initialize the logger; the log directory is created on first write."""
        self.log_dir = Path(log_dir) if log_dir is not None else settings.LOG_PATH
        self.enabled = settings.ACTIVITY_LOG_ENABLED if enabled is None else enabled

    def _get_log_filename(self) -> Path:
        """Returns the current day's log filename."""
        today = datetime.now().strftime("%Y-%m-%d")
        return self.log_dir / f"activity_log_{today}.csv"

    def _append_row(self, path: Path, header: list, row: list):
        self.log_dir.mkdir(parents=True, exist_ok=True)
        fresh = not path.exists() or path.stat().st_size == 0
        with open(path, mode='a', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            if fresh:
                writer.writerow(header)
            writer.writerow(row)

    def log_event(self, component: str, status: str, target: str, details: str = ""):
        """
        Logs an event to the daily CSV file.

        :param component: Service or endpoint (e.g. 'Oracle', 'Harness', 'API')
        :param status: 'START', 'INFO', 'SUCCESS', 'SKIP', 'FAIL', 'ERROR'
        :param target: Suite name, instance id or file path
        :param details: Optional free text or exception string
        """
        if status in ("ERROR", "FAIL"):
            logger.error(f"[{component}] {status} - {target}")
            if details:
                logger.error(f"Details: {details}")
        else:
            logger.info(f"[{component}] {status} - {target}")

        if not self.enabled:
            return
        try:
            timestamp = datetime.now().isoformat()
            self._append_row(
                self._get_log_filename(),
                ["Timestamp", "Component", "Status", "Target", "Details"],
                [timestamp, component, status, target, details],
            )
        except Exception as e:
            # Fallback to standard console logger if file op fails
            logger.error(f"Failed to write to activity CSV log: {e}")

    def log_check_failure(self, suite: str, instance_id: str, inequality: str, witness: str = ""):
        """
        Logs a violated inequality to a single CSV file, with no daily rotation.
        Columns: Timestamp, Suite, Instance, Inequality, Witness
        """
        logger.error(f"[CHECK FAILURE] {suite} {instance_id}: {inequality}")
        if not self.enabled:
            return
        try:
            timestamp = datetime.now().isoformat()
            self._append_row(
                self.log_dir / "check_failures.csv",
                ["Timestamp", "Suite", "Instance", "Inequality", "Witness"],
                [timestamp, suite, instance_id, inequality, witness],
            )
        except Exception as e:
            logger.error(f"Failed to write to check failure CSV log: {e}")

# Global instance
activity_logger = ActivityLogger()
