from src.datagen.csv_io import load_csv, load_grid, save_csv
from src.datagen.synthetic import Instance, generate

__all__ = ["Instance", "generate", "load_csv", "load_grid", "save_csv"]
