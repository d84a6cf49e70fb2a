import os
import sys

import click
import numpy as np

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))

from services.net_core_service import net_core_service  # noqa: E402
from services.oracle_service import oracle_service  # noqa: E402
from services.pearl_service import pearl_service  # noqa: E402
from utils.console import console  # noqa: E402
from utils.net_generators import NetGenerators  # noqa: E402


def max_pearl_error(rng: np.random.Generator, n_nets: int, max_nodes: int, max_card: int) -> float:
    worst = 0.0
    for _ in range(n_nets):
        net = NetGenerators.random_polytree(rng, int(rng.integers(2, max_nodes + 1)), max_card)
        evidence = NetGenerators.leaf_evidence(rng, net)
        beliefs = pearl_service.propagate(net, evidence).beliefs
        exact = oracle_service.posteriors(net, evidence, net.node_ids)
        for node_id in net.node_ids:
            worst = max(worst, float(np.abs(beliefs[node_id] - exact[node_id]).max()))
    return worst


def max_lambda_only_error(rng: np.random.Generator, n_nets: int, max_nodes: int, max_card: int) -> float:
    worst = 0.0
    for _ in range(n_nets):
        net = NetGenerators.random_tree(rng, int(rng.integers(2, max_nodes + 1)), max_card)
        evidence = NetGenerators.leaf_evidence(rng, net)
        root = net_core_service.roots(net)[0]
        upward = pearl_service.lambda_only_update(net, evidence, root)
        full = pearl_service.propagate(net, evidence).beliefs[root]
        worst = max(worst, float(np.abs(upward - full).max()))
    return worst


@click.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--polytrees", default=200, show_default=True)
@click.option("--trees", default=100, show_default=True)
@click.option("--max-nodes", default=10, show_default=True)
@click.option("--max-card", default=4, show_default=True)
def main(seed, polytrees, trees, max_nodes, max_card):
    """Random-net sweep: pearl vs oracle and lambda-only vs pearl."""
    rng = NetGenerators.seeded(seed)
    console.print(f"🔄 {polytrees} random polytrees (seed {seed})...")
    pearl_error = max_pearl_error(rng, polytrees, max_nodes, max_card)
    console.print(f"🔄 {trees} random trees...")
    lambda_error = max_lambda_only_error(rng, trees, max_nodes, max_card)

    click.echo(f"pearl_vs_exact_max_abs={pearl_error!r}")
    click.echo(f"lambda_only_vs_pearl_max_abs={lambda_error!r}")
    if pearl_error > 1e-9 or lambda_error > 1e-12:
        console.print("❌ solver check failed")
        sys.exit(1)
    console.print("✅ all solvers agree")


if __name__ == "__main__":
    main()
