"""EUP-deformed quantum mechanics and CHSH nonlocality toolkit."""
