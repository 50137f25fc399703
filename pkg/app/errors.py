"""
Error taxonomy for the screening pipeline
Every error carries the process exit code the CLI should return
"""

from typing import Optional


class LLAssistError(Exception):
    """Base class for all pipeline errors"""

    exit_code: int = 1


class ConfigurationError(LLAssistError):
    """Invalid configuration, credentials or column mapping"""


class InputError(ConfigurationError):
    """Input file could not be used (encoding, empty question list, ...)"""

    def __init__(self, message: str, byte_offset: Optional[int] = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class BackendUnavailableError(LLAssistError):
    """Backend kept failing after all retries"""

    exit_code = 2

    def __init__(self, message: str, last_status: Optional[int] = None):
        super().__init__(message)
        self.last_status = last_status


class ParseError(LLAssistError):
    """Model reply did not contain a usable machine-readable block"""

    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class CheckpointError(LLAssistError):
    """Checkpoint file could not be read or written"""


class DigestMismatchError(CheckpointError):
    """Checkpoint belongs to a different corpus, question set or backend"""

    def __init__(self, changed: str):
        super().__init__(
            f"Checkpoint does not match the current {changed}; "
            f"refusing to mix runs (start a fresh run instead of --resume)"
        )
        self.changed = changed


class RunHalted(LLAssistError):
    """Run stopped on an unavailable backend; checkpoint is flushed and resumable"""

    exit_code = 2

    def __init__(self, message: str, completed: int):
        super().__init__(message)
        self.completed = completed


class ContractViolation(LLAssistError):
    """A caller broke a documented precondition"""
