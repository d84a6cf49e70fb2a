from rich.console import Console

from utils.config_reader import get_solver_settings

# Diagnostics go to stderr; stdout is reserved for reports.
console = Console(stderr=True, highlight=False, soft_wrap=True)


def warn(message: str) -> None:
    if get_solver_settings().quiet:
        return
    console.print(f"⚠️ {message}", markup=False)


def info(message: str) -> None:
    if get_solver_settings().quiet:
        return
    console.print(message, markup=False)
