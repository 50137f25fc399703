"""
OpenAI-compatible chat backend
POST {base_url}/v1/chat/completions through the openai client
"""

import os

import openai
from openai import OpenAI
from loguru import logger

from app.config import BackendConfig
from app.errors import ConfigurationError
from app.model.base import ModelReply, TransientBackendError, is_retryable_status


class OpenAIModel:
    """OpenAI-compatible chat completion handler"""

    def __init__(self, config: BackendConfig):
        """
        Initialize OpenAI client

        Args:
            config: Backend definition; the API key is read from the
                environment variable named by config.api_key_env

        Raises:
            ConfigurationError: The key variable is unset or empty
        """
        self.config = config
        self.model = config.model_name
        api_key = os.environ.get(config.api_key_env or "", "").strip()
        if not api_key:
            raise ConfigurationError(
                f"Environment variable {config.api_key_env} must hold the API key "
                f"for backend model {config.model_name}"
            )

        # Retries are handled by the gateway so they can be counted and logged
        self.client = OpenAI(
            api_key=api_key,
            base_url=f"{config.base_url}/v1",
            timeout=config.request_timeout,
            max_retries=0,
        )
        logger.info(f"OpenAI-compatible model initialized: {self.model} at {config.base_url}")

    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        """
        Run one chat completion

        Raises:
            TransientBackendError: Connection problems, timeouts, 429, 5xx and malformed replies
            ConfigurationError: Any other 4xx (bad key, unknown model, ...)
        """
        messages = [
            {"role": "system", "content": system_prompt},
            {"role": "user", "content": user_prompt},
        ]
        try:
            response = self.client.chat.completions.create(
                model=self.model,
                messages=messages,
                temperature=self.config.temperature,
            )
        except openai.APIStatusError as e:
            if is_retryable_status(e.status_code):
                raise TransientBackendError(f"HTTP {e.status_code}: {e.message}", e.status_code) from e
            raise ConfigurationError(
                f"Backend rejected request with HTTP {e.status_code}: {e.message}"
            ) from e
        except openai.APIConnectionError as e:
            raise TransientBackendError(f"Connection error: {e}") from e
        except openai.APIResponseValidationError as e:
            raise TransientBackendError(f"Malformed response body: {e}", e.status_code) from e

        if not response.choices:
            raise TransientBackendError("Completion returned no choices")
        text = response.choices[0].message.content or ""
        usage = response.usage
        logger.debug(f"Generated response: {text[:100]}...")
        return ModelReply(
            text=text,
            prompt_tokens=usage.prompt_tokens if usage else None,
            completion_tokens=usage.completion_tokens if usage else None,
        )
