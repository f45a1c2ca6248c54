# this_file: tests/test_package.py
"""Test suite for omit_phase."""


def test_version():
    """Verify package exposes version."""
    import omit_phase

    assert omit_phase.__version__


def test_public_api():
    """The top-level names resolve."""
    import omit_phase

    for name in omit_phase.__all__:
        assert getattr(omit_phase, name) is not None
