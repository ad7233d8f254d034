"""Rich-based logging configuration for frokaweil.

Records are stamped with the module they come from and, inside
``run_context``, with the experiment name and seed that produced them, so a
log line can be matched to the report it belongs to. NumPy and SciPy warnings
(ill-conditioned solves, LinAlgWarning) are routed through the same handler.

Logs always go to stderr so reports written to stdout stay byte-stable. Set
FROKAWEIL_RICH_LOGS=0 for the plain pipe-separated format.
"""

from __future__ import annotations

import logging
import os
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

FROKAWEIL_THEME = Theme({
    "logging.level.debug": "blue",
    "logging.level.info": "green",
    "logging.level.warning": "yellow",
    "logging.level.error": "red bold",
    "logging.level.critical": "red bold reverse",
})

# Module name -> prefix shown on every record from that module
MODULE_COMPONENTS = {
    "ncalg": "NCALG",
    "mattuple": "TUPLE",
    "domain": "DOMAIN",
    "realization": "REAL",
    "zariski": "ZARISKI",
    "dilation": "DILATION",
    "experiments": "EXP",
    "cli": "CLI",
    "warnings": "NUMERIC",
}

COMPONENT_STYLES = {
    "NCALG": "cyan bold",
    "TUPLE": "magenta bold",
    "DOMAIN": "yellow bold",
    "REAL": "blue bold",
    "ZARISKI": "green bold",
    "DILATION": "red bold",
    "EXP": "cyan",
    "CLI": "magenta",
    "NUMERIC": "yellow",
}

PLAIN_FORMAT = "%(asctime)s | %(levelname)s | %(component)s | %(experiment)s | seed=%(seed)s | %(message)s"
RICH_FORMAT = "%(component)s %(run)s%(message)s"

_RUN: ContextVar[tuple[str, int] | None] = ContextVar("frokaweil_run", default=None)


@contextmanager
def run_context(experiment: str, seed: int) -> Iterator[None]:
    """Tag every record logged inside the block with the experiment and its seed."""
    token = _RUN.set((experiment, seed))
    try:
        yield
    finally:
        _RUN.reset(token)


def current_run() -> tuple[str, int] | None:
    return _RUN.get()


def component_of(logger_name: str) -> str:
    """Map a logger name such as frokaweil.realization to its prefix; unknown modules are upper-cased."""
    module = logger_name.rsplit(".", 1)[-1]
    return MODULE_COMPONENTS.get(module, module.upper())


def format_component(component: str) -> str:
    """Format a component name with Rich markup."""
    style = COMPONENT_STYLES.get(component.upper(), "white")
    return f"[{style}][{component}][/{style}]"


class RunContextFilter(logging.Filter):
    """Adds component, experiment, seed and run fields to each record."""

    def __init__(self, markup: bool = False) -> None:
        super().__init__()
        self.markup = markup

    def filter(self, record: logging.LogRecord) -> bool:
        component = component_of(record.name)
        run = _RUN.get()
        record.__dict__.update(
            component=format_component(component) if self.markup else component,
            experiment=run[0] if run else "-",
            seed=run[1] if run else "-",
            run=f"{run[0]}#{run[1]} " if run else "",
        )
        return True


def should_use_rich() -> bool:
    """Determine if Rich logging should be used.

    Returns True by default. Only disabled if FROKAWEIL_RICH_LOGS=0.
    """
    env_value = os.environ.get("FROKAWEIL_RICH_LOGS", "").lower()
    return env_value not in ("0", "false", "no")


def configure_logging(
    level: int = logging.INFO,
    force_rich: bool | None = None,
) -> None:
    """Install one stderr handler on the root logger and capture Python warnings.

    Args:
        level: Logging level (default: INFO)
        force_rich: Override auto-detection. None = auto-detect.
    """
    use_rich = force_rich if force_rich is not None else should_use_rich()

    root = logging.getLogger()
    root.handlers.clear()

    handler: logging.Handler
    if use_rich:
        console = Console(theme=FROKAWEIL_THEME, stderr=True)
        handler = RichHandler(
            console=console,
            show_time=True,
            show_level=True,
            show_path=False,
            rich_tracebacks=True,
            markup=True,
            log_time_format="[%Y-%m-%d %H:%M:%S]",
        )
        handler.setFormatter(logging.Formatter(RICH_FORMAT))
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(PLAIN_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    handler.addFilter(RunContextFilter(markup=use_rich))

    root.addHandler(handler)
    root.setLevel(level)
    logging.captureWarnings(True)
