"""
Ollama-compatible chat backend
POST {base_url}/api/chat with stream disabled
"""

import requests
from loguru import logger

from app.config import BackendConfig
from app.errors import ConfigurationError
from app.model.base import ModelReply, TransientBackendError, is_retryable_status


class LocalModel:
    """Local LLM Handler using Ollama"""

    def __init__(self, config: BackendConfig):
        self.config = config
        self.model_name = config.model_name
        self.api_endpoint = f"{config.base_url}/api/chat"
        logger.info(f"Local Model initialized with Ollama model: {self.model_name}")

    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        """
        Generate response using Ollama

        Usage is read from prompt_eval_count / eval_count when present.
        """
        payload = {
            "model": self.model_name,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
            "stream": False,
            "options": {"temperature": self.config.temperature},
        }

        try:
            response = requests.post(
                self.api_endpoint,
                json=payload,
                timeout=self.config.request_timeout,
            )
        except requests.RequestException as e:
            raise TransientBackendError(f"Could not reach Ollama at {self.api_endpoint}: {e}") from e

        if response.status_code >= 400:
            detail = response.text[:200]
            if is_retryable_status(response.status_code):
                raise TransientBackendError(
                    f"HTTP {response.status_code}: {detail}", response.status_code
                )
            raise ConfigurationError(
                f"Ollama rejected request with HTTP {response.status_code}: {detail}"
            )

        try:
            data = response.json()
        except ValueError as e:
            raise TransientBackendError(
                f"HTTP {response.status_code} with a non-JSON body: {response.text[:200]}", response.status_code
            ) from e
        if not isinstance(data, dict) or not isinstance(data.get("message"), dict):
            raise TransientBackendError(f"Reply without a message object: {str(data)[:200]}", response.status_code)

        text = data["message"].get("content") or ""
        logger.debug(f"Generated response: {text[:100]}...")
        return ModelReply(
            text=text,
            prompt_tokens=data.get("prompt_eval_count"),
            completion_tokens=data.get("eval_count"),
        )
