from .base import Agent, AgentError, detect_stage
from .llm import ChatCompletionAgent, CompletionClientConfig, ConfigError
from .oracle import OracleSolverAgent, SolverState, init_candidates
from .random_agent import RandomAgent

__all__ = [
    "Agent",
    "AgentError",
    "ChatCompletionAgent",
    "CompletionClientConfig",
    "ConfigError",
    "OracleSolverAgent",
    "RandomAgent",
    "SolverState",
    "detect_stage",
    "init_candidates",
]
