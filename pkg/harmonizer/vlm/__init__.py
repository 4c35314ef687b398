from .config import AgentConfig, DEFAULT_API_KEY_ENV
from .transcript import AgentTranscript, TranscriptSink, read_transcripts
from .prompt import build_request, render_prompt, encode_image, resolve_image, prompt_text, OUTPUT_INSTRUCTION
from .parse import parse_plan, extract_json_object, PlanSchema, GroupSchema
from .client import VLMAgent, vlm_agent_propose
from .mock_server import MockVLMServer, chat_completion
