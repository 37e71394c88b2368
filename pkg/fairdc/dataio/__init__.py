from .dataset import Dataset
from .matrix import MatrixReader, MatrixWriter, is_matrix_file, load_matrix, save_matrix
from .prep import Standardized, split, standardize, standardize_dataset
from .synthetic import blob_centers, make_biased_blobs
from .tabular import (
    CSVSchema,
    load_csv,
    load_labels,
    load_membership,
    read_column,
    read_table,
    write_csv,
    write_dataset,
)
