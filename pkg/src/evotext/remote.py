"""Small JSON-over-HTTP client shared by the remote victim and plugins."""

from __future__ import annotations

import json
import logging
import threading
import time
import urllib.error
import urllib.request

log = logging.getLogger(__name__)


class TransportError(RuntimeError):
    """Endpoint unreachable, timed out, or answered with a non-200 status."""


class MalformedResponse(RuntimeError):
    pass


class JsonClient:
    """POSTs JSON bodies to ``base_url + path``; one request in flight at a time."""

    def __init__(self, base_url: str, retries: int = 2, timeout: float = 10.0, backoff: float = 0.05):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.backoff = backoff
        self._lock = threading.Lock()

    def post(self, path: str, payload: dict) -> dict:
        body = json.dumps(payload).encode("utf-8")
        url = self.base_url + path
        last = None
        for attempt in range(self.retries + 1):
            req = urllib.request.Request(
                url, data=body, headers={"Content-Type": "application/json"}, method="POST"
            )
            try:
                with self._lock, urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    status = resp.status
                    raw = resp.read()
            except urllib.error.HTTPError as exc:
                last = TransportError(f"{url}: HTTP {exc.code}")
            except (urllib.error.URLError, OSError) as exc:
                last = TransportError(f"{url}: {exc}")
            else:
                if status != 200:
                    last = TransportError(f"{url}: HTTP {status}")
                else:
                    try:
                        return json.loads(raw.decode("utf-8"))
                    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                        raise MalformedResponse(f"{url}: invalid JSON ({exc})") from None
            log.debug("attempt %d on %s failed: %s", attempt + 1, url, last)
            if attempt < self.retries:
                time.sleep(self.backoff * (2**attempt))
        raise last
