import sys

import click

from .config import BridgeConfig
from .errors import BridgeError
from .extract import extract


@click.group()
def main():
    """Turn driving video clips into a binary embedding file."""


@main.command("extract")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--videos", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--frame-rate", type=click.Choice(["1", "10"]), default="10", show_default=True)
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Encoder checkpoint; omitted -> deterministic seeded init.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Init seed used when no checkpoint is given.")
def extract_cmd(manifest, videos, out, frame_rate, weights, seed):
    cfg = BridgeConfig(frame_rate=int(frame_rate), weights=weights, seed=seed)
    stats = extract(manifest, videos, out, cfg)
    click.echo(f"embedded {stats['embedded']} clips, rejected {stats['rejected']}")


def run():
    try:
        main(standalone_mode=False)
    except BridgeError as exc:
        click.echo(f"error[{type(exc).__name__}]: {exc}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(130)
