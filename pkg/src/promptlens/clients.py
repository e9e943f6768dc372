"""HTTP clients for the four pluggable endpoints.

Each client speaks a minimal JSON contract and accepts an injectable httpx
transport so tests can run against in-process ASGI apps.  Failures surface
as ClientError carrying status and attempt metadata; a semaphore bounds
in-flight requests per client.
"""

from __future__ import annotations

import base64
import os
import threading

import httpx

from .clarify import DecodeParams

ENV_LM_URL = "PROMPTLENS_LM_URL"
ENV_T2I_URL = "PROMPTLENS_T2I_URL"
ENV_VQA_URL = "PROMPTLENS_VQA_URL"
ENV_PARA_URL = "PROMPTLENS_PARA_URL"
ENV_TOKEN = "PROMPTLENS_TOKEN"


class ClientError(RuntimeError):
    def __init__(self, message: str, status: int | None = None, attempts: int = 1):
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class _BaseClient:
    env_var: str = ""

    def __init__(
        self,
        url: str | None = None,
        token: str | None = None,
        transport: httpx.BaseTransport | None = None,
        timeout: float = 60.0,
        max_retries: int = 2,
        max_in_flight: int = 4,
    ):
        self.url = url or os.environ.get(self.env_var)
        if not self.url:
            raise ClientError(f"no endpoint URL (set {self.env_var} or pass url=)")
        token = token or os.environ.get(ENV_TOKEN)
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._http = httpx.Client(transport=transport, timeout=timeout, headers=headers)
        self._retries = max_retries
        self._slots = threading.Semaphore(max_in_flight)

    def _post(self, payload: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(1, self._retries + 2):
            try:
                with self._slots:
                    response = self._http.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                last_exc = exc
                continue
            if response.status_code != 200:
                raise ClientError(
                    f"endpoint {self.url} returned {response.status_code}: "
                    f"{response.text[:200]}",
                    status=response.status_code,
                    attempts=attempt,
                )
            return response.json()
        raise ClientError(
            f"endpoint {self.url} unreachable: {last_exc}", attempts=self._retries + 1
        )

    def close(self) -> None:
        self._http.close()


class CompletionClient(_BaseClient):
    env_var = ENV_LM_URL

    def complete(self, prompt: str, params: DecodeParams = DecodeParams()) -> str:
        doc = self._post(
            {
                "prompt": prompt,
                "max_tokens": params.max_tokens,
                "temperature": params.temperature,
                "stop": list(params.stop),
            }
        )
        return doc["continuation"]


class T2IClient(_BaseClient):
    env_var = ENV_T2I_URL

    def generate(self, prompt: str, n: int) -> list[bytes]:
        doc = self._post({"prompt": prompt, "n": n})
        return [base64.b64decode(img) for img in doc["images"]]


class VQAClient(_BaseClient):
    env_var = ENV_VQA_URL

    def answer(self, image: bytes, question: str) -> str:
        doc = self._post(
            {"image": base64.b64encode(image).decode("ascii"), "question": question}
        )
        return doc["answer"]


class ParaphraseClient(_BaseClient):
    env_var = ENV_PARA_URL

    def paraphrase(self, text: str) -> str:
        return self._post({"text": text})["paraphrase"]
