#include "pnmf/matrix.hpp"

#include "pnmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>

namespace pnmf {

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    DenseMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c)
            throw ValidationError("from_rows: ragged initializer");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

SymmetricMatrix SymmetricMatrix::from_dense(const DenseMatrix& m, double tol) {
    if (m.rows() != m.cols())
        throw ValidationError("from_dense: matrix is not square");
    const std::size_t n = m.rows();
    SymmetricMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.set(i, i, m(i, i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = m(i, j);
            const double b = m(j, i);
            if (std::abs(a - b) > tol)
                throw ValidationError("from_dense: asymmetry at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ") exceeds tolerance");
            s.set(i, j, a == b ? a : 0.5 * (a + b));
        }
    }
    return s;
}

DenseMatrix SymmetricMatrix::to_dense() const {
    DenseMatrix m(order_, order_);
    m.values() = v_;
    return m;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw ValidationError("multiply: inner dimensions disagree");
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = &c.values()[i * n];
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = &b.values()[k * n];
            for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw ValidationError("multiply_at_b: row counts disagree");
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t n = b.cols();
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* bk = &b.values()[k * n];
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            double* ci = &c.values()[i * n];
            for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw ValidationError("multiply_a_bt: column counts disagree");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = &a.values()[i * a.cols()];
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = &b.values()[j * b.cols()];
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
            c(i, j) = acc;
        }
    }
    return c;
}

DenseMatrix multiply_sym(const DenseMatrix& a, const SymmetricMatrix& s) {
    if (a.cols() != s.order())
        throw ValidationError("multiply_sym: inner dimensions disagree");
    DenseMatrix c(a.rows(), s.order());
    const std::size_t n = s.order();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = &c.values()[i * n];
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* sk = &s.values()[k * n];
            for (std::size_t j = 0; j < n; ++j) ci[j] += aik * sk[j];
        }
    }
    return c;
}

namespace {

double frobenius_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

} // namespace

double frobenius_norm(const DenseMatrix& a) { return frobenius_of(a.values()); }
double frobenius_norm(const SymmetricMatrix& a) { return frobenius_of(a.values()); }

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("frobenius_distance: shapes disagree");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double frobenius_distance(const SymmetricMatrix& a, const SymmetricMatrix& b) {
    if (a.order() != b.order())
        throw ValidationError("frobenius_distance: orders disagree");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("frobenius_dot: shapes disagree");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.values()[i] * b.values()[i];
    return acc;
}

bool all_finite(const DenseMatrix& a) {
    return std::all_of(a.values().begin(), a.values().end(),
                       [](double v) { return std::isfinite(v); });
}

bool all_nonnegative(const DenseMatrix& a) {
    return std::all_of(a.values().begin(), a.values().end(), [](double v) { return v >= 0.0; });
}

double min_entry(const DenseMatrix& a) {
    if (a.empty())
        throw ValidationError("min_entry: empty matrix");
    return *std::min_element(a.values().begin(), a.values().end());
}

double max_abs_entry(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

SymmetricMatrix pairwise_distances(const DenseMatrix& x) {
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();
    if (n == 0)
        throw ValidationError("pairwise_distances: no samples");
    if (!all_finite(x))
        throw ValidationError("pairwise_distances: non-finite input");
    SymmetricMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double diff = x(k, i) - x(k, j);
                acc += diff * diff;
            }
            d.set(i, j, std::sqrt(acc));
        }
    }
    return d;
}

namespace numerics {

EigResult eig_sym(const SymmetricMatrix& m, const EigOptions& opts) {
    const std::size_t n = m.order();
    EigResult res;
    if (n == 0) return res;

    std::vector<double> a = m.values();
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    DenseMatrix v;
    if (opts.want_vectors) {
        v = DenseMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    }

    const double threshold = opts.tol * frobenius_norm(m);
    auto offdiag = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * at(i, j) * at(i, j);
        return std::sqrt(acc);
    };

    double off = offdiag();
    int sweep = 0;
    while (off > threshold) {
        if (sweep == opts.max_sweeps)
            throw ConvergenceError("eig_sym: no convergence after " +
                                       std::to_string(opts.max_sweeps) + " sweeps",
                                   off);
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double app = at(p, p);
                const double aqq = at(q, q);
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    const double np = c * akp - s * akq;
                    const double nq = s * akp + c * akq;
                    at(k, p) = np;
                    at(p, k) = np;
                    at(k, q) = nq;
                    at(q, k) = nq;
                }
                at(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                at(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;

                if (opts.want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p);
                        const double vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
        ++sweep;
        off = offdiag();
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return at(i, i) < at(j, j); });

    res.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.values[i] = at(order[i], order[i]);
    if (opts.want_vectors) {
        res.vectors = DenseMatrix(n, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    res.sweeps = sweep;
    res.offdiag = off;
    return res;
}

std::vector<double> eigenvalues_sym(const SymmetricMatrix& m) {
    EigOptions opts;
    opts.want_vectors = false;
    return eig_sym(m, opts).values;
}

TruncatedSvd truncated_svd(const DenseMatrix& x, std::size_t k) {
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();
    if (p == 0 || n == 0)
        throw ValidationError("truncated_svd: empty matrix");
    k = std::min(k, std::min(p, n));

    const bool gram_left = p <= n;
    const DenseMatrix gram_dense = gram_left ? multiply_a_bt(x, x) : multiply_at_b(x, x);
    const EigResult eig = eig_sym(SymmetricMatrix::from_dense(gram_dense));

    const std::size_t m = eig.values.size();
    TruncatedSvd out;
    out.singular_values.resize(k);
    out.u = DenseMatrix(p, k);
    out.v = DenseMatrix(n, k);

    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t idx = m - 1 - j;  // descending
        const double sigma = std::sqrt(std::max(0.0, eig.values[idx]));
        out.singular_values[j] = sigma;

        std::vector<double> g(m);
        for (std::size_t i = 0; i < m; ++i) g[i] = eig.vectors(i, idx);

        // Deterministic sign: make the dominant entry of the Gram-side vector positive.
        std::size_t arg = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(g[i]) > std::abs(g[arg])) arg = i;
        if (g[arg] < 0.0)
            for (double& gi : g) gi = -gi;

        if (gram_left) {
            for (std::size_t i = 0; i < p; ++i) out.u(i, j) = g[i];
            if (sigma > 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t r = 0; r < p; ++r) acc += x(r, i) * g[r];
                    out.v(i, j) = acc / sigma;
                }
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) out.v(i, j) = g[i];
            if (sigma > 0.0) {
                for (std::size_t i = 0; i < p; ++i) {
                    double acc = 0.0;
                    for (std::size_t r = 0; r < n; ++r) acc += x(i, r) * g[r];
                    out.u(i, j) = acc / sigma;
                }
            }
        }
    }
    return out;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceError("beta_cf: continued fraction did not converge", std::abs(h));
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw ValidationError("regularized_incomplete_beta: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError("pearson: series lengths disagree");
    const std::size_t n = x.size();
    if (n < 3)
        throw DegenerateInputError("pearson: need at least 3 observations");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateInputError("pearson: constant series");

    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    PearsonResult res;
    res.r = r;
    res.n = n;
    const double nu = static_cast<double>(n - 2);
    if (std::abs(r) == 1.0) {
        res.p_value = 0.0;
    } else {
        const double t2 = nu * r * r / (1.0 - r * r);
        res.p_value = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2));
    }
    return res;
}

} // namespace numerics
} // namespace pnmf
