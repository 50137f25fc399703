"""
Model Factory - Returns the chat backend matching a BackendConfig
"""

from loguru import logger

from app.config import BackendConfig
from app.errors import ConfigurationError
from app.model.base import ChatModel
from app.model.local_model import LocalModel
from app.model.mock_model import MockModel
from app.model.openai_model import OpenAIModel


class ModelFactory:
    """Factory for creating chat backend instances"""

    @staticmethod
    def get_model(config: BackendConfig) -> ChatModel:
        """
        Get the backend instance for a config

        Raises:
            ConfigurationError: Unknown kind or unresolvable credentials
        """
        logger.info(f"Initializing {config.kind} model {config.model_name}...")

        if config.kind == "openai_compatible":
            return OpenAIModel(config)
        elif config.kind == "ollama_compatible":
            return LocalModel(config)
        elif config.kind == "mock":
            return MockModel(config)
        else:
            raise ConfigurationError(
                f"Invalid backend kind: {config.kind}. "
                f"Must be 'openai_compatible', 'ollama_compatible' or 'mock'"
            )


def get_model(config: BackendConfig) -> ChatModel:
    """Convenience function to get a model instance"""
    return ModelFactory.get_model(config)
