"""Webhook delivery of alert summaries with bounded retry and a dead letter.

Alerts at or above the configured level are posted to the ticketing webhook.
Delivery is decoupled from ingestion: failures never propagate back, they are
retried with backoff and finally dead-lettered.
"""

from __future__ import annotations

import logging
import queue
import threading

from soccore.engine.alerts import Alert

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 5


def http_post_transport(timeout: float = 5.0):
    import requests

    def post(url: str, payload: dict) -> bool:
        response = requests.post(url, json=payload, timeout=timeout)
        return 200 <= response.status_code < 300

    return post


def summarize(alert: Alert) -> dict:
    payload = alert.to_record()
    payload["text"] = (
        f"[level {alert.level}] {alert.description} "
        f"(agent {alert.agent_id}, rule {alert.rule_id})"
    )
    return payload


class WebhookNotifier:
    """Threshold-gated alert forwarding.

    With synchronous=True (simulation mode) deliveries happen inline on
    submit; otherwise a worker thread drains a bounded queue and blocks
    producers when it fills up.
    """

    def __init__(
        self,
        url: str,
        threshold: int = DEFAULT_THRESHOLD,
        transport=None,
        clock=None,
        max_attempts: int = 3,
        backoff: float = 0.5,
        synchronous: bool = False,
        queue_size: int = 1000,
    ):
        self.url = url
        self.threshold = threshold
        self.transport = transport or (http_post_transport() if url else None)
        self.clock = clock
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.synchronous = synchronous
        self.deliveries: list[dict] = []
        self.dead_letters: list[dict] = []
        self._queue: queue.Queue = queue.Queue(maxsize=queue_size)
        self._worker: threading.Thread | None = None
        self._lock = threading.Lock()

    @property
    def configured(self) -> bool:
        return bool(self.url) and self.transport is not None

    def submit(self, alert: Alert) -> None:
        if not self.configured or alert.level < self.threshold:
            return
        if self.synchronous:
            self._deliver(alert)
        else:
            self._queue.put(alert)  # blocks when full: backpressure, not loss

    def _deliver(self, alert: Alert) -> None:
        payload = summarize(alert)
        for attempt in range(1, self.max_attempts + 1):
            try:
                if self.transport(self.url, payload):
                    with self._lock:
                        self.deliveries.append(payload)
                    return
            except Exception as exc:
                log.debug("webhook attempt %d failed: %s", attempt, exc)
            if attempt < self.max_attempts and self.clock is not None:
                self.clock.sleep(self.backoff * attempt)
        with self._lock:
            self.dead_letters.append(payload)
        log.warning("webhook delivery dead-lettered for alert %s", alert.id)

    # -- worker management (real deployments) -------------------------------

    def start(self) -> None:
        if self._worker is not None:
            return
        self._worker = threading.Thread(target=self._run, daemon=True, name="webhook")
        self._worker.start()

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            self._deliver(item)

    def stop(self) -> None:
        if self._worker is None:
            return
        self._queue.put(None)
        self._worker.join(timeout=5)
        self._worker = None
