"""Ticket lifecycle: cases opened from alerts, tracked until closed."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from soccore.errors import SocError

STATUS_OPEN = "open"
STATUS_CLOSED = "closed"


class UnknownAlert(SocError):
    def __init__(self, alert_id):
        super().__init__(f"no alert with id {alert_id!r}")


class UnknownTicket(SocError):
    def __init__(self, ticket_id):
        super().__init__(f"no ticket with id {ticket_id!r}")


class AlreadyClosed(SocError):
    pass


@dataclass
class Ticket:
    id: int
    alert_id: int
    status: str
    assignee: str
    created_at: str
    closed_at: str | None = field(default=None)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "alert_id": self.alert_id,
            "status": self.status,
            "assignee": self.assignee,
            "created_at": self.created_at,
            "closed_at": self.closed_at,
        }


class TicketBook:
    def __init__(self, alert_lookup):
        self._alert_lookup = alert_lookup
        self._tickets: dict[int, Ticket] = {}
        self._next_id = 1
        self._lock = threading.Lock()

    def create(self, alert_id: int, assignee: str, now: str) -> Ticket:
        if self._alert_lookup(alert_id) is None:
            raise UnknownAlert(alert_id)
        with self._lock:
            ticket = Ticket(
                id=self._next_id,
                alert_id=alert_id,
                status=STATUS_OPEN,
                assignee=assignee,
                created_at=now,
            )
            self._tickets[ticket.id] = ticket
            self._next_id += 1
        return ticket

    def close(self, ticket_id: int, now: str) -> Ticket:
        with self._lock:
            ticket = self._tickets.get(ticket_id)
            if ticket is None:
                raise UnknownTicket(ticket_id)
            if ticket.status == STATUS_CLOSED:
                raise AlreadyClosed(f"ticket {ticket_id} is already closed")
            ticket.status = STATUS_CLOSED
            ticket.closed_at = now
        return ticket

    def get(self, ticket_id: int) -> Ticket:
        ticket = self._tickets.get(ticket_id)
        if ticket is None:
            raise UnknownTicket(ticket_id)
        return ticket

    def list(self, status: str | None = None) -> list[Ticket]:
        tickets = list(self._tickets.values())
        if status is not None:
            tickets = [t for t in tickets if t.status == status]
        return tickets
