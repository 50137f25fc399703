"""LLM gateway: backends, retry policy, usage and cost accounting"""

import json
import math
import random
from types import SimpleNamespace
from unittest.mock import MagicMock, patch

import httpx
import openai
import pytest
import requests

from app.config import BackendConfig, ModelPricing
from app.errors import BackendUnavailableError, ConfigurationError, ContractViolation
from app.model import ChatExchange, ExchangeLog, LLMGateway, complete, cost_of, usage_totals
from app.model.base import TransientBackendError
from app.model.gateway import backoff_delay
from app.model.local_model import LocalModel
from app.model.openai_model import OpenAIModel


def _ollama(**overrides) -> BackendConfig:
    values = {"kind": "ollama_compatible", "model_name": "gemma2:9b", "max_retries": 3}
    values.update(overrides)
    return BackendConfig(**values)


def _http(status: int, payload=None, text: str = "") -> MagicMock:
    response = MagicMock()
    response.status_code = status
    response.text = text
    response.json.return_value = payload or {}
    return response


OK_REPLY = {"message": {"role": "assistant", "content": "hello"}, "prompt_eval_count": 12, "eval_count": 3}


class TestMockBackend:
    def test_complete_is_deterministic(self, mock_backend):
        first = complete("system prompt", "user prompt", mock_backend)
        second = complete("system prompt", "user prompt", mock_backend)
        assert first.raw_response == second.raw_response
        assert first.latency >= 0
        assert first.attempts == 1

    def test_usage_is_estimated_from_characters(self, mock_backend):
        exchange = complete("s" * 9, "u" * 4, mock_backend)
        assert exchange.tokens_estimated is True
        assert exchange.prompt_tokens == math.ceil(9 / 4) + 1
        assert exchange.completion_tokens == math.ceil(len(exchange.raw_response) / 4)

    def test_empty_prompt_is_a_contract_violation(self, mock_backend):
        with pytest.raises(ContractViolation):
            complete("system", "   ", mock_backend)


class TestRetryPolicy:
    def test_429_then_200_succeeds_after_one_backoff(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.side_effect = [_http(429, text="slow down"), _http(200, OK_REPLY)]
            gateway = LLMGateway(_ollama(), sleep=sleeps.append, rng=random.Random(7))
            exchange = gateway.complete("system", "user")

        assert exchange.raw_response == "hello"
        assert exchange.attempts == 2
        assert (exchange.prompt_tokens, exchange.completion_tokens) == (12, 3)
        assert exchange.tokens_estimated is False
        assert len(sleeps) == 1
        assert 0.8 <= sleeps[0] <= 1.2
        assert gateway.backoff_sleeps == sleeps

    def test_401_is_a_configuration_error_without_retry(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = _http(401, text="unauthorized")
            gateway = LLMGateway(_ollama(), sleep=sleeps.append)
            with pytest.raises(ConfigurationError):
                gateway.complete("system", "user")

        assert post.call_count == 1
        assert sleeps == []

    def test_exhausted_retries_report_last_status(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = _http(503, text="overloaded")
            gateway = LLMGateway(_ollama(max_retries=2), sleep=sleeps.append, rng=random.Random(1))
            with pytest.raises(BackendUnavailableError) as excinfo:
                gateway.complete("system", "user")

        assert post.call_count == 3
        assert len(sleeps) == 2
        assert excinfo.value.last_status == 503
        assert excinfo.value.exit_code == 2

    def test_connection_errors_are_retried(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.side_effect = [requests.ConnectionError("refused"), _http(200, OK_REPLY)]
            exchange = LLMGateway(_ollama(), sleep=sleeps.append).complete("system", "user")
        assert exchange.attempts == 2

    def test_zero_retries_fails_on_first_error(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.side_effect = requests.Timeout("timed out")
            with pytest.raises(BackendUnavailableError) as excinfo:
                LLMGateway(_ollama(max_retries=0), sleep=sleeps.append).complete("system", "user")
        assert post.call_count == 1
        assert excinfo.value.last_status is None

    def test_non_json_body_is_retried(self, sleeps):
        html = _http(200, text="<html>bad gateway</html>")
        html.json.side_effect = ValueError("Expecting value")
        with patch("app.model.local_model.requests.post") as post:
            post.side_effect = [html, _http(200, OK_REPLY)]
            exchange = LLMGateway(_ollama(), sleep=sleeps.append).complete("system", "user")
        assert exchange.raw_response == "hello"
        assert exchange.attempts == 2

    def test_persistent_non_json_body_halts_with_exit_code_2(self, sleeps):
        truncated = _http(200, text='{"message": {"content": "hel')
        truncated.json.side_effect = requests.JSONDecodeError("Unterminated string", truncated.text, 25)
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = truncated
            with pytest.raises(BackendUnavailableError) as excinfo:
                LLMGateway(_ollama(max_retries=1), sleep=sleeps.append).complete("system", "user")
        assert post.call_count == 2
        assert excinfo.value.last_status == 200
        assert excinfo.value.exit_code == 2

    def test_reply_without_message_object_is_transient(self):
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = _http(200, {"error": "model is loading"})
            with pytest.raises(TransientBackendError):
                LocalModel(_ollama()).chat("system", "user")

    def test_other_request_exceptions_are_retried(self, sleeps):
        with patch("app.model.local_model.requests.post") as post:
            post.side_effect = [requests.exceptions.ChunkedEncodingError("connection broken"), _http(200, OK_REPLY)]
            exchange = LLMGateway(_ollama(), sleep=sleeps.append).complete("system", "user")
        assert exchange.attempts == 2

    @pytest.mark.parametrize("attempt, base", [(1, 1.0), (2, 2.0), (3, 4.0), (5, 16.0)])
    def test_backoff_doubles_with_bounded_jitter(self, attempt, base):
        rng = random.Random(attempt)
        for _ in range(50):
            assert base * 0.8 <= backoff_delay(attempt, rng) <= base * 1.2


class TestOllamaWireShape:
    def test_request_payload(self):
        config = _ollama(base_url="http://gpu-box:11434/", temperature=0.3)
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = _http(200, OK_REPLY)
            LocalModel(config).chat("sys", "usr")

        url = post.call_args.args[0]
        body = post.call_args.kwargs["json"]
        assert url == "http://gpu-box:11434/api/chat"
        assert body["model"] == "gemma2:9b"
        assert body["stream"] is False
        assert body["options"] == {"temperature": 0.3}
        assert body["messages"] == [
            {"role": "system", "content": "sys"},
            {"role": "user", "content": "usr"},
        ]

    def test_missing_usage_is_estimated(self):
        with patch("app.model.local_model.requests.post") as post:
            post.return_value = _http(200, {"message": {"content": "abcdefgh"}})
            exchange = LLMGateway(_ollama()).complete("system", "user")
        assert exchange.tokens_estimated is True
        assert exchange.completion_tokens == 2


class TestOpenAIBackend:
    @pytest.fixture
    def config(self) -> BackendConfig:
        return BackendConfig(kind="openai_compatible", model_name="gpt-4o", api_key_env="TEST_LLM_KEY")

    def _status_error(self, status: int) -> openai.APIStatusError:
        request = httpx.Request("POST", "https://api.openai.com/v1/chat/completions")
        return openai.APIStatusError("error", response=httpx.Response(status, request=request), body=None)

    def test_missing_key_is_a_configuration_error(self, config, monkeypatch):
        monkeypatch.delenv("TEST_LLM_KEY", raising=False)
        with pytest.raises(ConfigurationError, match="TEST_LLM_KEY"):
            OpenAIModel(config)

    def test_client_targets_v1_without_sdk_retries(self, config, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "sk-test")
        model = OpenAIModel(config)
        assert str(model.client.base_url).rstrip("/") == "https://api.openai.com/v1"
        assert model.client.max_retries == 0

    def test_usage_is_read_from_response(self, config, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "sk-test")
        model = OpenAIModel(config)
        model.client = MagicMock()
        model.client.chat.completions.create.return_value = SimpleNamespace(
            choices=[SimpleNamespace(message=SimpleNamespace(content="answer"))],
            usage=SimpleNamespace(prompt_tokens=40, completion_tokens=7),
        )

        reply = model.chat("sys", "usr")

        kwargs = model.client.chat.completions.create.call_args.kwargs
        assert kwargs["model"] == "gpt-4o"
        assert kwargs["temperature"] == 0.0
        assert kwargs["messages"][1] == {"role": "user", "content": "usr"}
        assert (reply.text, reply.prompt_tokens, reply.completion_tokens) == ("answer", 40, 7)

    @pytest.mark.parametrize("status, expected", [(429, TransientBackendError), (500, TransientBackendError), (401, ConfigurationError), (404, ConfigurationError)])
    def test_status_errors_are_classified(self, config, monkeypatch, status, expected):
        monkeypatch.setenv("TEST_LLM_KEY", "sk-test")
        model = OpenAIModel(config)
        model.client = MagicMock()
        model.client.chat.completions.create.side_effect = self._status_error(status)
        with pytest.raises(expected):
            model.chat("sys", "usr")

    def test_empty_choices_are_transient(self, config, monkeypatch, sleeps):
        monkeypatch.setenv("TEST_LLM_KEY", "sk-test")
        model = OpenAIModel(config)
        model.client = MagicMock()
        model.client.chat.completions.create.return_value = SimpleNamespace(choices=[], usage=None)
        with pytest.raises(TransientBackendError):
            model.chat("sys", "usr")

        gateway = LLMGateway(config.model_copy(update={"max_retries": 1}), model=model, sleep=sleeps.append)
        with pytest.raises(BackendUnavailableError):
            gateway.complete("sys", "usr")
        assert model.client.chat.completions.create.call_count == 3
        assert len(sleeps) == 1


class TestExchangeLog:
    def test_entries_carry_stage_and_article(self, tmp_path, mock_backend):
        log = ExchangeLog(tmp_path / "logs" / "exchanges.jsonl")
        gateway = LLMGateway(mock_backend, exchange_log=log)
        gateway.complete("sys", "first", stage="extraction", article_index=3)
        gateway.complete("sys", "second", stage="assessment", article_index=3, question_label="RQ2")

        entries = [json.loads(line) for line in log.path.read_text(encoding="utf-8").splitlines()]
        assert [e["stage"] for e in entries] == ["extraction", "assessment"]
        assert entries[1]["question_label"] == "RQ2"
        assert entries[0]["user_prompt"] == "first"
        assert "raw_response" in entries[0]


def _exchange(prompt_tokens: int, completion_tokens: int) -> ChatExchange:
    return ChatExchange("s", "u", "r", prompt_tokens, completion_tokens, latency=0.0)


class TestCostOf:
    @pytest.mark.parametrize(
        "usage, rates, expected",
        [
            ([(1_000_000, 0)], (0.50, 1.50), 0.50),
            ([], (0.50, 1.50), 0.0),
            ([(20_000, 6_000)] * 100, (5.0, 15.0), 19.00),
            ([(1234, 567)], (2.5, 10.0), 0.008755),
            ([(1, 1)], (0.15, 0.60), 0.000001),
            ([(150_000, 20_000), (50_000, 5_000)], (0.15, 0.60), 0.045),
        ],
    )
    def test_hand_computed_totals(self, usage, rates, expected):
        pricing = ModelPricing(input_cost_per_million_tokens=rates[0], output_cost_per_million_tokens=rates[1])
        assert cost_of([_exchange(*u) for u in usage], pricing) == pytest.approx(expected, abs=1e-9)

    def test_additive_up_to_final_rounding(self):
        pricing = ModelPricing(input_cost_per_million_tokens=2.5, output_cost_per_million_tokens=10.0)
        rng = random.Random(3)
        a = [_exchange(rng.randint(0, 5000), rng.randint(0, 800)) for _ in range(40)]
        b = [_exchange(rng.randint(0, 5000), rng.randint(0, 800)) for _ in range(25)]
        assert cost_of(a + b, pricing) == pytest.approx(cost_of(a, pricing) + cost_of(b, pricing), abs=2e-6)

    def test_usage_totals_mark_estimates(self):
        exchanges = [_exchange(10, 2), ChatExchange("s", "u", "r", 5, 1, 0.0, tokens_estimated=True)]
        totals = usage_totals(exchanges)
        assert (totals.prompt_tokens, totals.completion_tokens, totals.estimated) == (15, 3, True)
        assert totals.total_tokens == 18
