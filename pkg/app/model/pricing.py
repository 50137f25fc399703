"""
Token usage and cost accounting
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import TYPE_CHECKING, Iterable

from app.config import ModelPricing

if TYPE_CHECKING:
    from app.model.gateway import ChatExchange


_MILLION = Decimal(1_000_000)
_SIX_PLACES = Decimal("0.000001")


def cost_of(exchanges: Iterable["ChatExchange"], pricing: ModelPricing) -> float:
    """
    Price a set of exchanges

    Sums prompt_tokens x input rate + completion_tokens x output rate with
    rates per million tokens. Only the final sum is rounded (half-up, 6 places).
    """
    input_rate = Decimal(str(pricing.input_cost_per_million_tokens))
    output_rate = Decimal(str(pricing.output_cost_per_million_tokens))
    total = Decimal(0)
    for exchange in exchanges:
        total += Decimal(exchange.prompt_tokens) * input_rate
        total += Decimal(exchange.completion_tokens) * output_rate
    return float((total / _MILLION).quantize(_SIX_PLACES, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class UsageTotals:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    estimated: bool = False  # True when any exchange lacked backend usage data

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


def usage_totals(exchanges: Iterable["ChatExchange"]) -> UsageTotals:
    prompt = completion = 0
    estimated = False
    for exchange in exchanges:
        prompt += exchange.prompt_tokens
        completion += exchange.completion_tokens
        estimated = estimated or exchange.tokens_estimated
    return UsageTotals(prompt, completion, estimated)
