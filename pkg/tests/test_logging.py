"""Tests for the rich logging setup and run-context stamping."""

from __future__ import annotations

import logging
import warnings
from collections.abc import Iterator

import pytest
from rich.logging import RichHandler

from frokaweil.experiments import _ordered_map
from frokaweil.logging import (
    PLAIN_FORMAT,
    RunContextFilter,
    component_of,
    configure_logging,
    current_run,
    format_component,
    run_context,
    should_use_rich,
)


def make_record(name: str = "frokaweil.realization") -> logging.LogRecord:
    return logging.LogRecord(name, logging.WARNING, __file__, 1, "resolvent is ill-conditioned", None, None)


def stamped(record: logging.LogRecord) -> tuple[object, object, object]:
    return record.__dict__["experiment"], record.__dict__["seed"], record.__dict__["run"]


class Collector(logging.Handler):
    def __init__(self) -> None:
        super().__init__()
        self.records: list[logging.LogRecord] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.records.append(record)


@pytest.fixture
def restore_root() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    logging.captureWarnings(False)
    root.handlers[:] = handlers
    root.setLevel(level)


class TestHandlers:
    """Tests for handler selection."""

    def test_rich_by_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("FROKAWEIL_RICH_LOGS", raising=False)

        assert should_use_rich()

    @pytest.mark.parametrize("value", ["0", "false", "No"])
    def test_rich_disabled(self, monkeypatch: pytest.MonkeyPatch, value: str) -> None:
        monkeypatch.setenv("FROKAWEIL_RICH_LOGS", value)

        assert not should_use_rich()

    @pytest.mark.usefixtures("restore_root")
    def test_plain_handler(self) -> None:
        configure_logging(logging.DEBUG, force_rich=False)
        root = logging.getLogger()

        assert len(root.handlers) == 1
        assert not isinstance(root.handlers[0], RichHandler)
        assert root.level == logging.DEBUG
        assert any(isinstance(f, RunContextFilter) for f in root.handlers[0].filters)

    @pytest.mark.usefixtures("restore_root")
    def test_rich_handler(self) -> None:
        configure_logging(logging.WARNING, force_rich=True)

        assert isinstance(logging.getLogger().handlers[0], RichHandler)

    @pytest.mark.usefixtures("restore_root")
    def test_numeric_warnings_are_captured(self) -> None:
        """Test that warnings.warn from numerical code lands in the log as a NUMERIC record."""
        configure_logging(logging.WARNING, force_rich=False)
        collector = Collector()
        logging.getLogger("py.warnings").addHandler(collector)

        try:
            with warnings.catch_warnings():
                warnings.simplefilter("always")
                warnings.warn("matrix is close to singular", RuntimeWarning, stacklevel=1)
        finally:
            logging.getLogger("py.warnings").removeHandler(collector)

        assert any("close to singular" in r.getMessage() for r in collector.records)
        assert component_of("py.warnings") == "NUMERIC"


class TestComponents:
    """Tests for module prefixes."""

    @pytest.mark.parametrize(
        ("name", "component"),
        [("frokaweil.realization", "REAL"), ("frokaweil.mattuple", "TUPLE"), ("frokaweil.experiments", "EXP")],
    )
    def test_module_prefix(self, name: str, component: str) -> None:
        assert component_of(name) == component

    def test_unknown_module_is_upper_cased(self) -> None:
        assert component_of("scipy.linalg") == "LINALG"

    def test_markup(self) -> None:
        assert format_component("REAL") == "[blue bold][REAL][/blue bold]"
        assert format_component("other") == "[white][other][/white]"


class TestRunContext:
    """Tests for experiment and seed stamping."""

    def test_outside_a_run(self) -> None:
        record = make_record()

        RunContextFilter().filter(record)

        assert current_run() is None
        assert stamped(record) == ("-", "-", "")
        assert record.__dict__["component"] == "REAL"

    def test_inside_a_run(self) -> None:
        record = make_record("frokaweil.dilation")

        with run_context("dilate", 7):
            RunContextFilter(markup=True).filter(record)

        assert stamped(record) == ("dilate", 7, "dilate#7 ")
        assert record.__dict__["component"] == "[red bold][DILATION][/red bold]"
        assert current_run() is None

    def test_plain_line(self) -> None:
        record = make_record()
        with run_context("consistency", 3):
            RunContextFilter().filter(record)

        line = logging.Formatter(PLAIN_FORMAT).format(record)

        assert line.endswith("| WARNING | REAL | consistency | seed=3 | resolvent is ill-conditioned")

    def test_nested_runs_restore(self) -> None:
        with run_context("okaweil", 1):
            with run_context("converge", 2):
                assert current_run() == ("converge", 2)
            assert current_run() == ("okaweil", 1)

    def test_thread_pool_sees_the_run(self) -> None:
        with run_context("axioms", 11):
            seen = _ordered_map(lambda _: current_run(), range(4), workers=3)

        assert seen == [("axioms", 11)] * 4
