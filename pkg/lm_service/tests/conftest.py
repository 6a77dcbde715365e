import pytest

from lm_service.app import create_app


@pytest.fixture(scope="session")
def service_app():
    """One app, and therefore one model, for the whole session.

    Construction pays the torch import once; every test that needs the
    model reaches through ``service_app.state``.
    """
    app = create_app("builtin:tiny")
    assert app.state.model is not None, app.state.failure
    return app


@pytest.fixture(scope="session")
def model(service_app):
    return service_app.state.model
