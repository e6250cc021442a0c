"""
Tests for utils/errors.py

Covers payload formatting and command error handling with focus on:
- success_payload format and fields
- error_payload format and fields
- ToolkitError subclasses and their exit codes
- handle_errors decorator behavior
"""
import json

import click
import pytest
from click.testing import CliRunner

from utils.errors import (
    ERROR_CODES,
    ConfigError,
    DimensionMismatchError,
    EventDataError,
    InputNotFoundError,
    ModelFormatError,
    OutOfVocabularyError,
    ToolkitError,
    TrecFormatError,
    ZeroAnchorError,
    error_payload,
    handle_errors,
    success_payload,
)
from utils.run_id import start_run


class TestSuccessPayload:
    """Tests for success_payload function."""

    def test_basic_success_payload(self):
        """Should return ok=True and status=success."""
        payload = success_payload()
        assert payload["ok"] is True
        assert payload["status"] == "success"
        assert "data" not in payload

    def test_success_payload_with_data_and_message(self):
        """Should include data and message when provided."""
        payload = success_payload(data={"projected": 3}, message="done")
        assert payload["data"]["projected"] == 3
        assert payload["message"] == "done"

    def test_success_payload_with_run_id(self):
        """Should include runId inside a run."""
        start_run("run_abc")
        assert success_payload()["runId"] == "run_abc"

    def test_success_payload_without_run(self):
        """Should omit runId outside a run."""
        assert "runId" not in success_payload()


class TestErrorPayload:
    """Tests for error_payload function."""

    def test_basic_error_payload(self):
        """Should return ok=False with the error block."""
        payload = error_payload("NOT_FOUND", "missing file")
        assert payload["ok"] is False
        assert payload["status"] == "error"
        assert payload["error"]["code"] == "NOT_FOUND"
        assert payload["error"]["message"] == "missing file"

    def test_error_payload_with_details(self):
        """Extra keyword details should land in the error block."""
        payload = error_payload("DATA_FORMAT_ERROR", "bad line", line=4)
        assert payload["error"]["line"] == 4

    def test_error_payload_carries_run_id(self):
        """Error payload should carry the active run ID."""
        start_run("run_err")
        assert error_payload("INTERNAL_ERROR", "boom")["error"]["runId"] == "run_err"


class TestErrorClasses:
    """Tests for ToolkitError and its subclasses."""

    def test_error_codes_constants(self):
        """Every code should map to a distinct nonzero exit code."""
        assert ERROR_CODES["INTERNAL_ERROR"] == 1
        assert ERROR_CODES["VALIDATION_ERROR"] == 2
        assert all(code != 0 for code in ERROR_CODES.values())
        assert len(set(ERROR_CODES.values())) == len(ERROR_CODES)

    def test_base_error_defaults_exit_code(self):
        """Exit code should follow the error code."""
        error = ToolkitError("NOT_FOUND", "nope")
        assert error.exit_code == ERROR_CODES["NOT_FOUND"]
        assert str(error) == "nope"

    def test_model_format_error_mentions_line(self):
        """Model format errors should carry path and line."""
        error = ModelFormatError("bad row", "m.txt", 7)
        assert error.code == "MODEL_FORMAT_ERROR"
        assert error.line == 7
        assert "7" in error.message and "m.txt" in error.message

    def test_out_of_vocabulary_names_token(self):
        """OOV errors should name the missing token."""
        error = OutOfVocabularyError("zebra", "1999")
        assert error.token == "zebra"
        assert "zebra" in error.message
        assert error.exit_code == ERROR_CODES["OUT_OF_VOCABULARY"]

    def test_zero_anchor_error_names_event(self):
        """Zero-anchor errors should name the event."""
        error = ZeroAnchorError("Gulf_War", "1991")
        assert error.event == "Gulf_War"
        assert error.code == "ZERO_ANCHORS"

    @pytest.mark.parametrize("error,code", [
        (ConfigError("x"), "VALIDATION_ERROR"),
        (InputNotFoundError("/nowhere", "corpus"), "NOT_FOUND"),
        (DimensionMismatchError(3, 2), "DIMENSION_MISMATCH"),
        (EventDataError("x", 2), "DATA_FORMAT_ERROR"),
        (TrecFormatError("x", 2), "DATA_FORMAT_ERROR"),
    ])
    def test_subclass_codes(self, error, code):
        """Each subclass should use its error code."""
        assert isinstance(error, ToolkitError)
        assert error.code == code


class TestHandleErrors:
    """Tests for the handle_errors command decorator."""

    def _command(self, exc):
        @click.command()
        @handle_errors
        def failing():
            if exc is not None:
                raise exc
            click.echo("fine")
        return failing

    def test_passes_through_on_success(self):
        """Should not interfere with a successful command."""
        result = CliRunner().invoke(self._command(None))
        assert result.exit_code == 0
        assert result.output.strip() == "fine"

    def test_toolkit_error_exit_code(self):
        """Should exit with the error's exit code."""
        result = CliRunner().invoke(self._command(InputNotFoundError("/x", "corpus")))
        assert result.exit_code == ERROR_CODES["NOT_FOUND"]

    def test_toolkit_error_payload_on_stderr(self):
        """Should print the JSON error payload on stderr."""
        runner = CliRunner(mix_stderr=False)
        result = runner.invoke(self._command(ConfigError("bad lambda")))
        payload = json.loads(result.stderr.strip().splitlines()[-1])
        assert payload["error"]["code"] == "VALIDATION_ERROR"
        assert payload["error"]["message"] == "bad lambda"
        assert result.stdout == ""

    def test_unexpected_error_is_internal(self):
        """Any other exception should exit with INTERNAL_ERROR."""
        result = CliRunner().invoke(self._command(RuntimeError("boom")))
        assert result.exit_code == ERROR_CODES["INTERNAL_ERROR"]

    def test_click_exceptions_pass_through(self):
        """Click usage errors should keep click's own handling."""
        result = CliRunner().invoke(self._command(click.UsageError("bad usage")))
        assert result.exit_code == 2
        assert "bad usage" in result.output
