"""BDF-k Wasserstein gradient flow solver for one-dimensional super-fast diffusion."""

from .cli import cli


def run() -> None:
    """Run the wasserstein-bdf command line."""
    cli()
