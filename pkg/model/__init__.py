# Model package for the advective Allen-Cahn solver
