from __future__ import annotations

import pytest

from suggestion_gateway import MockProvider, ProviderConfig, Settings, build_registry, create_app
from suggestion_gateway.providers import echo_mock

from helpers import FakeClock


@pytest.fixture()
def registry():
    return build_registry()


@pytest.fixture()
def make_app(tmp_path):
    """Factory for a gateway app wired to a mock provider and tmp storage.

    Returns (client, provider, settings, clock). Rate limits default to
    effectively-off so unrelated tests never trip them.
    """
    from fastapi.testclient import TestClient

    def _make(
        *,
        script=None,
        default=echo_mock,
        rate_bucket=1000.0,
        rate_refill=100.0,
        cache_ttl_s=30.0,
        max_retries=0,
        data_dir=None,
    ):
        clock = FakeClock()
        settings = Settings(
            cache_ttl_s=cache_ttl_s,
            rate_bucket=rate_bucket,
            rate_refill=rate_refill,
            data_dir=str(data_dir or tmp_path / "data"),
            provider=ProviderConfig(model_name="test-model", max_retries=max_retries),
        )
        provider = MockProvider(script=dict(script or {}), default=default)
        app = create_app(settings, provider=provider, clock=clock)
        client = TestClient(app)
        return client, provider, settings, clock

    return _make
