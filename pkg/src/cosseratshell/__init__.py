"""Static Cosserat shell solver on SE(3) with hard-magnetic loading."""

__version__ = "0.1.0"
