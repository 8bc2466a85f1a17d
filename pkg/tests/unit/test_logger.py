"""Unit tests for the structured JSON logger."""

import io
import json

import pytest

from intermodal_mtl.core.logger import RunContextLogger, get_logger, log_execution


@pytest.fixture
def captured():
    """Logger whose records land in a string buffer."""
    logger = RunContextLogger("tests.logger.captured")
    buffer = io.StringIO()
    logger.logger.handlers[0].setStream(buffer)
    logger.logger.setLevel("DEBUG")

    def records():
        return [json.loads(line) for line in buffer.getvalue().splitlines()]

    yield logger, records
    logger.clear_context()


class TestRunContextLogger:

    def test_json_record_fields(self, captured):
        logger, records = captured
        logger.info("hello", path="/tmp/x", details={'k': 1})
        record = records()[0]
        assert record['message'] == "hello"
        assert record['level'] == "INFO"
        assert record['path'] == "/tmp/x"
        assert record['details'] == {'k': 1}
        assert 'timestamp' in record

    def test_context_stamped_until_cleared(self, captured):
        logger, records = captured
        logger.set_context(seed=3, mode="mtl")
        logger.debug("first")
        logger.clear_context()
        logger.debug("second")
        first, second = records()
        assert first['seed'] == 3 and first['mode'] == "mtl"
        assert 'seed' not in second

    def test_epoch_completed_event(self, captured):
        logger, records = captured
        logger.epoch_completed(2, 0.5, dev_loss=0.6, dev_score=0.7, step=8)
        record = records()[0]
        assert record['event'] == "epoch_completed"
        assert record['epoch'] == 2
        assert record['step'] == 8
        assert record['details']['dev_score'] == 0.7

    def test_numeric_failure_is_critical(self, captured):
        logger, records = captured
        logger.numeric_failure("training loss", details={'value': 'nan'})
        record = records()[0]
        assert record['level'] == "CRITICAL"
        assert record['event'] == "numeric_failure"

    def test_get_logger_reuses_handler(self):
        first = get_logger("tests.logger.shared")
        second = get_logger("tests.logger.shared")
        assert first.logger is second.logger
        assert len(second.logger.handlers) == 1


class TestLogExecution:

    def test_returns_result_and_reraises(self):
        @log_execution
        def ok():
            return 5

        @log_execution
        def broken():
            raise ValueError("boom")

        assert ok() == 5
        with pytest.raises(ValueError, match="boom"):
            broken()
