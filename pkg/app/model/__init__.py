"""Chat backends and the gateway in front of them"""

from app.model.gateway import ChatExchange, ExchangeLog, LLMGateway, complete
from app.model.mock_model import mock_complete
from app.model.pricing import UsageTotals, cost_of, usage_totals

__all__ = [
    "ChatExchange",
    "ExchangeLog",
    "LLMGateway",
    "complete",
    "mock_complete",
    "cost_of",
    "usage_totals",
    "UsageTotals",
]
