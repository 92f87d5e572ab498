#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pnmf {

/// Dense row-major matrix of doubles. Value type; all operations are free
/// functions so expressions stay explicit about cost.
///
/// Convention used throughout the library: data matrices are p x n with one
/// sample per column, embeddings are d x n, basis matrices are p x d.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

/// Symmetric matrix with full storage; set() writes both mirror entries, so
/// the symmetry invariant holds exactly (not just up to tolerance).
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t order, double fill = 0.0)
        : order_(order), v_(order * order, fill) {}

    /// Throws ValidationError if |m - m^T| exceeds tol anywhere; entries are
    /// symmetrized by averaging so the result is exactly symmetric.
    static SymmetricMatrix from_dense(const DenseMatrix& m, double tol = 0.0);

    std::size_t order() const { return order_; }

    double operator()(std::size_t i, std::size_t j) const { return v_[i * order_ + j]; }

    void set(std::size_t i, std::size_t j, double value) {
        v_[i * order_ + j] = value;
        v_[j * order_ + i] = value;
    }

    const std::vector<double>& values() const { return v_; }

    DenseMatrix to_dense() const;

    bool operator==(const SymmetricMatrix&) const = default;

private:
    std::size_t order_ = 0;
    std::vector<double> v_;
};

DenseMatrix transpose(const DenseMatrix& a);

/// a * b
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b without forming the transpose
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T without forming the transpose
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);
/// a * s where s is symmetric
DenseMatrix multiply_sym(const DenseMatrix& a, const SymmetricMatrix& s);

double frobenius_norm(const DenseMatrix& a);
double frobenius_norm(const SymmetricMatrix& a);
double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_distance(const SymmetricMatrix& a, const SymmetricMatrix& b);

/// Frobenius inner product sum_ij a_ij b_ij.
double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b);

bool all_finite(const DenseMatrix& a);
bool all_nonnegative(const DenseMatrix& a);
double min_entry(const DenseMatrix& a);
double max_abs_entry(const DenseMatrix& a);

/// Euclidean distance matrix of the columns of x. Exact zeros on the
/// diagonal; symmetric by construction.
SymmetricMatrix pairwise_distances(const DenseMatrix& x);

namespace numerics {

struct EigOptions {
    bool want_vectors = true;
    /// Convergence: off-diagonal Frobenius mass <= tol * ||m||_F.
    double tol = 1e-12;
    int max_sweeps = 100;
};

struct EigResult {
    std::vector<double> values;   ///< ascending
    DenseMatrix vectors;          ///< column j pairs with values[j]; empty unless requested
    int sweeps = 0;
    double offdiag = 0.0;         ///< residual off-diagonal norm at exit
};

/// Cyclic Jacobi eigendecomposition. Throws ConvergenceError (carrying the
/// residual) if max_sweeps is exhausted.
EigResult eig_sym(const SymmetricMatrix& m, const EigOptions& opts = {});

/// Eigenvalues only, ascending.
std::vector<double> eigenvalues_sym(const SymmetricMatrix& m);

struct TruncatedSvd {
    std::vector<double> singular_values;  ///< descending
    DenseMatrix u;                        ///< p x k
    DenseMatrix v;                        ///< n x k
};

/// Rank-k truncated SVD computed through the smaller Gram matrix. k is capped
/// at min(p, n); trailing exact-zero singular values are kept so the caller
/// always gets k triples back.
TruncatedSvd truncated_svd(const DenseMatrix& x, std::size_t k);

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;   ///< two-sided, via the exact t reference
    std::size_t n = 0;
};

/// Pearson correlation with a two-sided p-value. Throws DegenerateInputError
/// on n < 3 or a constant series.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

} // namespace numerics
} // namespace pnmf
