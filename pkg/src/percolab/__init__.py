"""Percolation, random walks and spanning forests on finite balls of infinite graphs."""

__version__ = "0.1.0"

from percolab.graphs import (  # noqa: E402
    Graph,
    GraphSpecError,
    RegularTree,
    parse_family,
    parse_graph_spec,
)
from percolab.percolation import Config, clusters, sample_bond, sample_site  # noqa: E402

__all__ = ["Graph", "GraphSpecError", "RegularTree", "parse_family", "parse_graph_spec",
           "Config", "clusters", "sample_bond", "sample_site", "__version__"]
