"""Bell's local sign model versus the Cl(3,0) trivector model, with a simulated bomb-fragment experiment."""

__version__ = "0.1.0"
