from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union
from threading import Lock, Thread
from flask import Flask, jsonify, request, make_response
from werkzeug.serving import make_server
import time

Reply = Tuple[int, str]
Responder = Callable[[dict], Reply]

def chat_completion(content: str, model: str = "mock") -> Dict[str, object]:
    return {
        "id": "mock-completion",
        "object": "chat.completion",
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
    }

class MockVLMServer:
    """
    A local chat-completions server for tests and dry runs.

    Replies are consumed in order from `responses`; each is either a
    `(status, content)` pair or a callable taking the request payload and
    returning one. A 2xx content is wrapped into a chat-completion body,
    anything else is sent as the raw error body. Once the script runs out,
    `default` answers (HTTP 503 if not given).

        with MockVLMServer([(200, '{"groups": []}')]) as server:
            config = AgentConfig(endpoint=server.url)
    """
    def __init__(self, responses: Iterable[Union[Reply, Responder]] = (),
                 default: Optional[Union[Reply, Responder]] = None, delay: float = 0.0):
        self._script: List[Union[Reply, Responder]] = list(responses)
        self.default = default
        self.delay = delay
        self.requests: List[dict] = []
        self.headers: List[Dict[str, str]] = []
        self.in_flight = 0
        self.peak_in_flight = 0
        self._lock = Lock()
        self._server = None
        self._thread: Optional[Thread] = None
        self.app = self._create_app()

    def _create_app(self) -> Flask:
        app = Flask(__name__)

        @app.route("/")
        def status():
            return make_response(("mock vlm endpoint is running\n", 200))

        @app.route("/v1/chat/completions", methods=["POST"])
        def chat():
            payload = request.get_json(force=True, silent=True) or {}
            with self._lock:
                self.requests.append(payload)
                self.headers.append(dict(request.headers))
                reply = self._script.pop(0) if self._script else self.default
                self.in_flight += 1
                self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
            try:
                if self.delay:
                    time.sleep(self.delay)
            finally:
                with self._lock:
                    self.in_flight -= 1
            if reply is None:
                return make_response(("no scripted response left", 503))
            code, content = reply(payload) if callable(reply) else reply
            if 200 <= code < 300:
                return jsonify(chat_completion(content, payload.get("model", "mock"))), code
            return make_response((content, code))

        return app

    def push(self, *replies: Union[Reply, Responder]) -> None:
        with self._lock:
            self._script.extend(replies)

    @property
    def request_count(self) -> int:
        with self._lock:
            return len(self.requests)

    @property
    def port(self) -> int:
        return self._server.server_port

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}/v1/chat/completions"

    def start(self) -> "MockVLMServer":
        self._server = make_server("127.0.0.1", 0, self.app, threaded=True)
        self._thread = Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._thread.join(timeout=5)
            self._server = None

    def __enter__(self) -> "MockVLMServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
