from dataclasses import dataclass, asdict
from typing import Dict, Optional
from ..errors import ConfigError

DEFAULT_API_KEY_ENV = "HARMONIZER_VLM_API_KEY"

@dataclass(frozen=True)
class AgentConfig:
    endpoint: str
    model: str = "default"
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout: float = 60.0
    max_retries: int = 2
    max_concurrency: int = 4
    temperature: float = 0.0
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    images_dir: Optional[str] = None

    def __post_init__(self):
        if not self.endpoint:
            raise ConfigError("AgentConfig.endpoint is required for the vlm agent")
        if not self.timeout > 0:
            raise ConfigError("AgentConfig.timeout must be > 0")
        if self.max_retries < 0:
            raise ConfigError("AgentConfig.max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ConfigError("AgentConfig.max_concurrency must be >= 1")
        if self.backoff_base < 0 or self.backoff_factor < 1:
            raise ConfigError("AgentConfig backoff needs base >= 0 and factor >= 1")

    def backoff_delay(self, retry: int) -> float:
        """Delay before the `retry`-th retry (1-based), without jitter."""
        return self.backoff_base * self.backoff_factor ** (retry - 1)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)
