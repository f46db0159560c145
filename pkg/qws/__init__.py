"""qws - continuous-time quantum walk analysis: state transfer, periodicity and mixing."""


def _get_version() -> str:
    """Get version from package metadata or pyproject.toml."""
    # Installed: ask the package metadata.
    try:
        import importlib.metadata as importlib_metadata

        return importlib_metadata.version(__name__)
    except (ImportError, ModuleNotFoundError, importlib_metadata.PackageNotFoundError):
        pass

    # Built tree: setuptools-scm wrote qws/_version.py.
    try:
        from qws._version import version

        return version
    except ImportError:
        pass

    # Source checkout: read the static version from pyproject.toml.
    import os

    pyproject_path = os.path.abspath(
        os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "pyproject.toml")
    )
    if os.path.exists(pyproject_path):
        with open(pyproject_path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line.startswith("version = "):
                    return line.split("=", 1)[1].strip().strip("\"'")
    return "0+unknown"


__version__ = _get_version()
