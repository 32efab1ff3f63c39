"""Python bindings for the faculty dashboard core."""

import json as _json

from ._core import (
    FacdashError,
    Service,
    kde_bandwidth,
    kde_curve,
    kde_density_at,
    parse_cents,
    parse_eval_workbook,
    percentile_rank,
    question_mean,
    read_csv,
    read_xlsx,
    round_to,
    routes,
    trapezoid_integral,
    write_csv,
    write_xlsx,
)

SESSION_COOKIE = "facdash_session"
CSRF_HEADER = "x-csrf-token"


class Client:
    """Calls a Service the way a browser would, keeping the session cookie
    and sending the CSRF token."""

    def __init__(self, service):
        self.service = service
        self.session = None
        self.csrf = None

    def call(self, method, path, body=None, query=None, parts=None):
        headers = {}
        if self.session:
            headers["cookie"] = f"{SESSION_COOKIE}={self.session}"
        if self.csrf:
            headers[CSRF_HEADER] = self.csrf
        raw = None
        if body is not None:
            raw = _json.dumps(body)
            headers["content-type"] = "application/json"
        if parts:
            headers["content-type"] = "multipart/form-data; boundary=x"
        res = self.service.request(method, path, raw, headers, query or {}, parts or [])
        for name, value in res["headers"]:
            if name == "Set-Cookie" and value.startswith(SESSION_COOKIE + "="):
                self.session = value.split(";", 1)[0].split("=", 1)[1] or None
        payload = None
        if res["body"] and res["content_type"] == "application/json":
            payload = _json.loads(res["body"])
            if res["status"] == 200 and isinstance(payload, dict) and "csrf_token" in payload:
                self.csrf = payload["csrf_token"]
        return res["status"], payload

    def login(self, email, password):
        return self.call("POST", "/api/session", {"email": email, "password": password})


__all__ = [
    "Client",
    "FacdashError",
    "Service",
    "kde_bandwidth",
    "kde_curve",
    "kde_density_at",
    "parse_cents",
    "parse_eval_workbook",
    "percentile_rank",
    "question_mean",
    "read_csv",
    "read_xlsx",
    "round_to",
    "routes",
    "trapezoid_integral",
    "write_csv",
    "write_xlsx",
]
