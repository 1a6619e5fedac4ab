"""HTTP client helpers: in-process ASGI by default, remote URL when given."""

from __future__ import annotations

import asyncio

import httpx


class SyncASGITransport(httpx.BaseTransport):
    """Bridge a sync httpx.Client onto an ASGI app, one event loop per call.

    httpx ships only an async ASGI transport; the CLI is synchronous, so
    requests are replayed through the async transport under asyncio.run.
    """

    def __init__(self, app) -> None:
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content = request.read()

        async def _roundtrip() -> httpx.Response:
            async_request = httpx.Request(
                request.method, request.url, headers=request.headers, content=content
            )
            response = await self._transport.handle_async_request(async_request)
            body = await response.aread()
            await response.aclose()
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=body,
            )

        return asyncio.run(_roundtrip())


def in_process_client() -> httpx.Client:
    """Client bound to a fresh app instance; no socket, no server process."""
    from .app import create_app

    return httpx.Client(
        transport=SyncASGITransport(create_app()), base_url="http://symtree.local"
    )


def remote_client(base_url: str, api_key: str = "") -> httpx.Client:
    headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
    return httpx.Client(base_url=base_url, headers=headers, timeout=300.0)
