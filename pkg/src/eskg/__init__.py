"""eskg: an expert-in-the-loop emotional-support engine built on an abstract
stressor knowledge graph and per-child temporal knowledge graphs."""

__version__ = "0.1.0"
