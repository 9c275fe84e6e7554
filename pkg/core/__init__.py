# Numerical core package
