import pytest
import yaml

from tests import write_images


def pytest_addoption(parser):
    """Add a command line option to run the tests that train networks."""
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="run tests that train networks at desk scale")


def pytest_configure(config):
    config.addinivalue_line("markers",
                            "slow: trains networks, needs --slow to run")


def pytest_collection_modifyitems(config, items):
    """Select tests to run based on command line options."""
    if config.getoption("--slow"):
        return
    skip_slow = pytest.mark.skip(reason="need --slow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def image_dir(tmp_path):
    """Directory with four smooth 48x40 PNG images."""
    dirname = str(tmp_path / 'images')
    write_images(dirname, 4, 48, 40)
    return dirname


@pytest.fixture
def config_file(tmp_path):
    """Return a function writing a configuration file from keywords."""

    def _write(**settings):
        filename = str(tmp_path / 'config.yml')
        settings.setdefault('output_dir', str(tmp_path / 'output'))
        with open(filename, 'w') as file:
            yaml.safe_dump(settings, file)
        return filename

    return _write
