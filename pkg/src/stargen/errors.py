"""Shared error base class.

Every toolkit error carries a stable, machine-readable ``code`` string that
survives serialization boundaries (CLI diagnostics, HTTP error bodies) and an
optional ``item_id`` naming the offending manifest/campaign entity.
"""

from __future__ import annotations


class StargenError(Exception):
    code = "Error"

    def __init__(self, message: str, *, item_id: str | None = None):
        super().__init__(message)
        self.item_id = item_id

    def describe(self) -> str:
        if self.item_id:
            return f"{self.code} at {self.item_id}: {self}"
        return f"{self.code}: {self}"
