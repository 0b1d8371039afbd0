from src.polybasis.basis import PolyBasis, build_basis, condition_number, default_grid

__all__ = ["PolyBasis", "build_basis", "condition_number", "default_grid"]
