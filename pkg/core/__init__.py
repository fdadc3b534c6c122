# Numerical core: chain correlators, Williamson modes, entropies and continuum checks
