#pragma once

// Dense/sparse type aliases and the repo-wide notion of numerical rank.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

namespace fcsim {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatI = Eigen::SparseMatrix<int>;
using Triplet = Eigen::Triplet<double>;
using TripletI = Eigen::Triplet<int>;

/// Singular values at or below this value count as zero:
/// max(rows, cols) * machine epsilon * largest singular value.
double rank_threshold(const Vec& singular_values, Index rows, Index cols);

/// Rank of `m` under rank_threshold. The empty matrix has rank 0.
Index numerical_rank(const Mat& m);

/// Orthonormal basis of ker(m) (columns).
Mat null_space(const Mat& m);
/// Same, treating singular values up to rel_tol * sigma_max as zero.
Mat null_space(const Mat& m, double rel_tol);

/// Orthonormal basis of ker(m^T) (columns).
Mat left_null_space(const Mat& m);

/// Smallest eigenvalue of a symmetric matrix (0x0 -> +inf).
double min_symmetric_eigenvalue(const Mat& m);

/// Sparse selection matrix (rows x cols) with a single 1 at (indices[c], c).
SpMat selection_matrix(Index rows, const std::vector<Index>& indices);

/// Block-stacks sparse matrices with the same number of columns.
SpMat vstack(const std::vector<const SpMat*>& blocks);

/// Block-concatenates sparse matrices with the same number of rows.
SpMat hstack(const std::vector<const SpMat*>& blocks);

}  // namespace fcsim
