"""Domain models and numerical kernels for the ASSETAX tax engine"""
