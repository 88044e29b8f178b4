//! Matrix, graph and ranking containers shared by every solver layer.

mod graph;
mod matrix;
mod ranking;

pub use graph::{edges_from_matrix, EdgeSet, DEFAULT_EDGE_THRESHOLD};
pub use matrix::{Dataset, MatrixRows, SquareMatrix, SymmetricMatrix};
pub use ranking::{rank_row, RankedRow};
