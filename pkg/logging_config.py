"""
Logging setup for solver runs: rotating run log, console output and Sentry reporting
"""
import logging
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional, Union

try:
    import sentry_sdk
    from sentry_sdk.integrations.logging import LoggingIntegration
except ImportError:
    sentry_sdk = None
    LoggingIntegration = None


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE_NAME = "advac.log"


def parse_level(level: Union[int, str]) -> int:
    """Accept logging levels as ints or names ('DEBUG', 'info', ...)"""
    if isinstance(level, int):
        return level
    value = logging.getLevelName(str(level).upper())
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level '{level}'")
    return value


class LoggingConfig:
    """Process-wide logging for the solver and the CLI"""

    _initialized = False
    _sentry_initialized = False

    @classmethod
    def setup_logging(cls, log_dir: Optional[str] = "Logs", log_level: Union[int, str] = logging.INFO,
                      console: bool = True):
        """
        Install the run log handlers on the root logger

        Args:
            log_dir: Directory of advac.log (rotated daily, 7 kept); None disables the file
            log_level: Level as int or name
            console: Also log to stderr
        """
        if cls._initialized:
            return
        level = parse_level(log_level)

        root_logger = logging.getLogger()
        root_logger.setLevel(level)
        root_logger.handlers.clear()
        formatter = logging.Formatter(LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')

        if log_dir:
            log_path = Path(log_dir)
            log_path.mkdir(parents=True, exist_ok=True)
            file_handler = TimedRotatingFileHandler(
                filename=log_path / LOG_FILE_NAME,
                when='midnight',
                interval=1,
                backupCount=7,
                encoding='utf-8'
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)

        if console:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(level)
            console_handler.setFormatter(formatter)
            root_logger.addHandler(console_handler)

        cls._initialized = True
        root_logger.info(f"Logging initialized (level {logging.getLevelName(level)}, directory {log_dir})")

    @classmethod
    def reset(cls):
        """Drop installed handlers so setup_logging can run again"""
        root_logger = logging.getLogger()
        for handler in list(root_logger.handlers):
            handler.close()
            root_logger.removeHandler(handler)
        cls._initialized = False
        cls._sentry_initialized = False

    @classmethod
    def setup_sentry(cls, dsn: Optional[str] = None, environment: str = "production",
                     traces_sample_rate: float = 0.0):
        """
        Report solver failures to Sentry when a DSN is configured

        Args:
            dsn: Sentry DSN; nothing happens without one
            environment: Environment name
            traces_sample_rate: Fraction of transactions to trace
        """
        if cls._sentry_initialized or not dsn:
            return
        if sentry_sdk is None:
            from utils.dependency_checker import DependencyChecker
            logging.getLogger(__name__).warning(
                f"SENTRY_DSN is set but sentry-sdk is not installed. "
                f"{DependencyChecker.get_installation_help_message('sentry')}"
            )
            return

        try:
            sentry_sdk.init(
                dsn=dsn,
                environment=environment,
                traces_sample_rate=traces_sample_rate,
                integrations=[
                    LoggingIntegration(
                        level=logging.INFO,
                        event_level=logging.ERROR
                    ),
                ],
                send_default_pii=False,
                attach_stacktrace=True,
                max_breadcrumbs=50,
            )
            cls._sentry_initialized = True
            logging.getLogger(__name__).info(f"Sentry initialized for environment: {environment}")
        except Exception as e:
            logging.getLogger(__name__).error(f"Failed to initialize Sentry: {str(e)}")

    @classmethod
    def is_sentry_enabled(cls) -> bool:
        return cls._sentry_initialized

    @classmethod
    def capture_exception(cls, exception: Exception, context: Optional[Dict[str, Any]] = None):
        """
        Forward an exception to Sentry with run context

        Args:
            exception: The exception to capture
            context: Problem name, step index, residual history, ...; dict values
                become Sentry contexts, other values extras
        """
        if not cls._sentry_initialized or sentry_sdk is None:
            return
        with sentry_sdk.push_scope() as scope:
            for key, value in (context or {}).items():
                if isinstance(value, dict):
                    scope.set_context(key, value)
                else:
                    scope.set_extra(key, value)
            sentry_sdk.capture_exception(exception)
