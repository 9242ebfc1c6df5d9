"""File and directory paths for generated files."""
from pathlib import Path

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


def check_and_create(directory: Path) -> Path:
    """Create directory if it doesn't exist and return it."""
    if not directory.is_dir():
        directory.mkdir(parents=True, exist_ok=True)
    return directory


class Workspace:
    """Generated files and directories of a pipeline run."""

    NUGGETS_DIRECTORY_NAME: str = "nuggets"

    def __init__(self, output_path: Path) -> None:
        self.output_path: Path = output_path
        self._nuggets_path: Path = output_path / self.NUGGETS_DIRECTORY_NAME

    def get_nuggets_path(self) -> Path:
        """Directory for per-query nugget dumps."""
        return check_and_create(self._nuggets_path)

    def get_index_path(self) -> Path:
        """Default path of the sparse index snapshot."""
        return check_and_create(self.output_path) / "index.json"
