from typing import List, Optional
from threading import BoundedSemaphore
import asyncio
import random
import time
import json
import os
import aiohttp
from .config import AgentConfig
from .parse import parse_plan
from .prompt import build_request, prompt_text
from .transcript import AgentTranscript, TranscriptSink
from ..dataset.model import PageRecord
from ..engine.agent import HarmonizationAgent
from ..engine.plan import HarmonizationPlan, validate_plan
from ..engine.rules import RuleSet
from ..taxonomy.taxonomy import TaxonomyMapping
from ..errors import AgentExhaustedError, PlanParseError, TransportError
from ..common import logger

def _response_content(data) -> str:
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise PlanParseError("Response has no choices[0].message.content", json.dumps(data)[:500])
    if isinstance(content, list):
        # some servers return content parts
        content = "".join(part.get("text", "") for part in content if isinstance(part, dict))
    if not isinstance(content, str):
        raise PlanParseError("Response content is not text", json.dumps(data)[:500])
    return content

class VLMAgent(HarmonizationAgent):
    """
    Asks a vision-language model served behind an OpenAI-compatible
    chat-completions endpoint for a plan.

    Each `propose` call runs its own event loop, so the agent can be driven
    from the page worker threads of `harmonize_dataset`. The number of
    requests in flight across all threads never exceeds `max_concurrency`.
    """
    name = "vlm"

    def __init__(self, config: AgentConfig, transcripts: Optional[TranscriptSink] = None):
        self.config = config
        self.transcripts = transcripts if transcripts is not None else TranscriptSink()
        self._slots = BoundedSemaphore(config.max_concurrency)
        self._api_key = os.environ.get(config.api_key_env)
        if not self._api_key:
            logger.warning("%s is not set, requests are sent without an API key", config.api_key_env)

    @property
    def headers(self):
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def propose(self, page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet) -> HarmonizationPlan:
        return asyncio.run(self.apropose(page, mapping, rules))

    async def _post(self, session: aiohttp.ClientSession, payload) -> str:
        url = self.config.endpoint
        with self._slots:
            try:
                async with session.post(url, json=payload, headers=self.headers) as response:
                    if response.status // 100 != 2:
                        body = await response.text()
                        raise TransportError(f"HTTP {response.status} from {url}: {body[:200]}", response.status)
                    data = await response.json(content_type=None)
            except asyncio.TimeoutError as err:
                raise TransportError(f"Request to {url} timed out after {self.config.timeout}s") from err
            except aiohttp.ClientError as err:
                raise TransportError(f"Request to {url} failed: {err}") from err
            except ValueError as err:
                raise PlanParseError(f"Response body is not JSON ({err})") from err
        return _response_content(data)

    async def _backoff(self, retry: int) -> None:
        delay = self.config.backoff_delay(retry)
        delay += random.uniform(0, delay / 4)
        if delay > 0:
            await asyncio.sleep(delay)

    def _record(self, page: PageRecord, attempt: int, prompt: str, response: Optional[str],
                parse_outcome: str, validator_outcome: str, started: float) -> None:
        self.transcripts.append(AgentTranscript(
            page_id=page.image_id, attempt=attempt, prompt=prompt, response_text=response,
            parse_outcome=parse_outcome, validator_outcome=validator_outcome,
            latency_ms=round((time.perf_counter() - started) * 1000, 3),
        ))

    async def apropose(self, page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet) -> HarmonizationPlan:
        config = self.config
        attempts = 1 + config.max_retries
        feedback: List[str] = []
        reasons: List[str] = []
        transport_retries = 0

        timeout = aiohttp.ClientTimeout(total=config.timeout)
        async with aiohttp.ClientSession(timeout=timeout) as session:
            for attempt in range(1, attempts + 1):
                # a GroundingError here is not retried, nothing was sent
                payload = build_request(
                    page, page.annotations, rules, model=config.model, temperature=config.temperature,
                    images_dir=config.images_dir, mapping=mapping, feedback=feedback,
                )
                prompt = prompt_text(payload)
                started = time.perf_counter()
                response = None
                try:
                    response = await self._post(session, payload)
                    plan = parse_plan(response, page)
                except TransportError as err:
                    reasons.append(str(err))
                    self._record(page, attempt, prompt, None, f"transport_error: {err}", "skipped", started)
                    logger.debug("Page %s attempt %d: %s", page.image_id, attempt, err)
                    if attempt < attempts:
                        transport_retries += 1
                        await self._backoff(transport_retries)
                    continue
                except PlanParseError as err:
                    reasons.append(str(err))
                    feedback = [f"the answer could not be parsed: {err}"]
                    self._record(page, attempt, prompt, response, f"parse_error: {err}", "skipped", started)
                    continue

                violations = validate_plan(page, plan, rules)
                if not violations:
                    self._record(page, attempt, prompt, response, "ok", "ok", started)
                    return plan
                feedback = [str(v) for v in violations]
                reasons.append("; ".join(feedback))
                self._record(page, attempt, prompt, response, "ok",
                             "rejected: " + "; ".join(feedback), started)

        raise AgentExhaustedError(page.image_id, attempts, reasons)

def vlm_agent_propose(page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet,
                      config: AgentConfig, transcripts: Optional[TranscriptSink] = None) -> HarmonizationPlan:
    return VLMAgent(config, transcripts).propose(page, mapping, rules)
