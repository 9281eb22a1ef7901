"""Green functions, Borcherds products and arithmetic series on Hilbert modular surfaces."""
