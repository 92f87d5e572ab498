// Python bindings. Arrays cross the boundary in the numpy convention
// (samples in rows); internally the library keeps samples in columns, so
// every entry point transposes on the way in and out.
#include "pnmf/datagen.hpp"
#include "pnmf/errors.hpp"
#include "pnmf/evaluation.hpp"
#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/scalegraph.hpp"
#include "pnmf/solver.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace py = pybind11;

namespace {

pnmf::DenseMatrix matrix_from_samples(const py::array_t<double>& array) {
    const auto buf = array.request();
    if (buf.ndim != 2)
        throw std::invalid_argument("expected a 2d array of shape (n_samples, n_features)");
    const auto rows = static_cast<std::size_t>(buf.shape[0]);
    const auto cols = static_cast<std::size_t>(buf.shape[1]);
    const auto row_stride = static_cast<std::size_t>(buf.strides[0] / sizeof(double));
    const auto col_stride = static_cast<std::size_t>(buf.strides[1] / sizeof(double));
    const double* data = static_cast<const double*>(buf.ptr);

    pnmf::DenseMatrix x(cols, rows);  // features x samples
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            x(j, i) = data[i * row_stride + j * col_stride];
    return x;
}

py::array_t<double> array_from_matrix(const pnmf::DenseMatrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.values().data(), m.rows() * m.cols() * sizeof(double));
    return out;
}

py::array_t<double> array_from_symmetric(const pnmf::SymmetricMatrix& m) {
    py::array_t<double> out({m.order(), m.order()});
    double* data = out.mutable_data();
    for (std::size_t i = 0; i < m.order(); ++i)
        for (std::size_t j = 0; j < m.order(); ++j) data[i * m.order() + j] = m(i, j);
    return out;
}

py::array_t<double> array_from_vector(const std::vector<double>& v) {
    py::array_t<double> out(v.size());
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

pnmf::solver::ScaleMode mode_from_name(const std::string& name) {
    if (name == "canonical") return pnmf::solver::ScaleMode::canonical;
    if (name == "uds") return pnmf::solver::ScaleMode::uds;
    if (name == "rds") return pnmf::solver::ScaleMode::rds;
    if (name == "mss") return pnmf::solver::ScaleMode::mss;
    if (name == "explicit") return pnmf::solver::ScaleMode::explicit_list;
    throw std::invalid_argument("unknown scale mode '" + name + "'");
}

py::dict dict_from_result(const pnmf::solver::MultiScaleFactors& r) {
    py::list basis, embedding;
    for (const auto& pair : r.pairs) {
        basis.append(array_from_matrix(pair.w));
        embedding.append(array_from_matrix(pnmf::transpose(pair.h)));
    }
    py::dict out;
    out["scales"] = array_from_vector(r.scales);
    out["basis"] = basis;
    out["embedding"] = embedding;
    out["objective_trace"] = array_from_vector(r.objective_trace);
    out["outer_iterations"] = r.outer_iterations;
    out["converged"] = r.converged;
    py::list exits;
    for (const auto& e : r.exits) {
        py::dict entry;
        entry["sweep"] = e.sweep;
        entry["scale"] = e.scale;
        entry["inner_iterations"] = e.inner_iterations;
        entry["hit_iteration_cap"] = e.hit_iteration_cap;
        entry["kkt_residual"] = e.kkt_residual;
        entry["objective"] = e.objective;
        exits.append(entry);
    }
    out["exits"] = exits;
    return out;
}

pnmf::solver::SolverConfig config_from_kwargs(std::size_t rank, double lambda_graph,
                                              double lambda_coupling, double lambda_ridge,
                                              double alpha, double margin, double tol_inner,
                                              double tol_outer, std::size_t max_inner,
                                              std::size_t max_outer, const std::string& scale_mode,
                                              const std::vector<double>& scales,
                                              std::size_t max_scales, std::uint64_t seed,
                                              bool normalize) {
    pnmf::solver::SolverConfig cfg;
    cfg.rank = rank;
    cfg.lambda_graph = lambda_graph;
    cfg.lambda_coupling = lambda_coupling;
    cfg.lambda_ridge = lambda_ridge;
    cfg.alpha = alpha;
    cfg.margin = margin;
    cfg.tol_inner = tol_inner;
    cfg.tol_outer = tol_outer;
    cfg.max_inner = max_inner;
    cfg.max_outer = max_outer;
    cfg.scale_mode = mode_from_name(scale_mode);
    cfg.explicit_scales = scales;
    cfg.max_scales = max_scales;
    cfg.seed = seed;
    cfg.normalize_output = normalize;
    return cfg;
}

std::vector<int> labels_from_array(const py::array_t<int>& array) {
    const auto buf = array.request();
    if (buf.ndim != 1)
        throw std::invalid_argument("labels must be a 1d integer array");
    const auto n = static_cast<std::size_t>(buf.shape[0]);
    const auto stride = static_cast<std::size_t>(buf.strides[0] / sizeof(int));
    const int* data = static_cast<const int*>(buf.ptr);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = data[i * stride];
    return out;
}

} // namespace

PYBIND11_MODULE(_pnmf, m) {
    m.doc() = "persistence-guided multi-scale nonnegative matrix factorization";
    m.attr("__version__") = "0.1.0";

    py::register_exception<pnmf::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<pnmf::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def(
        "pairwise_distances",
        [](const py::array_t<double>& x) {
            return array_from_symmetric(pnmf::pairwise_distances(matrix_from_samples(x)));
        },
        py::arg("x"), "Euclidean distance matrix of the sample rows.");

    m.def(
        "h0_deaths",
        [](const py::array_t<double>& x, double margin) {
            const auto dist = pnmf::pairwise_distances(matrix_from_samples(x));
            const double cutoff = pnmf::persistence::delta_max(dist, margin);
            return array_from_vector(pnmf::persistence::compute_h0_diagram(dist, cutoff).deaths);
        },
        py::arg("x"), py::arg("margin") = 0.05,
        "Death times of the connectivity filtration, terminal scale appended.");

    m.def(
        "canonical_scales",
        [](const py::array_t<double>& x, double margin) {
            const auto dist = pnmf::pairwise_distances(matrix_from_samples(x));
            const double cutoff = pnmf::persistence::delta_max(dist, margin);
            const auto scales = pnmf::persistence::canonical_scale_set(
                pnmf::persistence::compute_h0_diagram(dist, cutoff));
            return array_from_vector(std::vector<double>(scales.begin(), scales.end()));
        },
        py::arg("x"), py::arg("margin") = 0.05, "Deduplicated death times.");

    m.def(
        "betti0",
        [](const py::array_t<double>& x, double eps) {
            return pnmf::persistence::betti0_at(pnmf::pairwise_distances(matrix_from_samples(x)),
                                                eps);
        },
        py::arg("x"), py::arg("eps"),
        "Number of connected components at scale eps (edges strictly below eps).");

    m.def(
        "build_laplacian",
        [](const py::array_t<double>& x, double eps, double alpha) {
            const auto graph = pnmf::scalegraph::build_graph(
                pnmf::pairwise_distances(matrix_from_samples(x)), eps, alpha);
            return array_from_symmetric(graph.laplacian);
        },
        py::arg("x"), py::arg("eps"), py::arg("alpha") = 1.5,
        "Unnormalized graph Laplacian at scale eps.");

    m.def(
        "solve_pnmf",
        [](const py::array_t<double>& x, std::size_t rank, double lambda_graph,
           double lambda_coupling, double lambda_ridge, double alpha, double margin,
           double tol_inner, double tol_outer, std::size_t max_inner, std::size_t max_outer,
           const std::string& scale_mode, const std::vector<double>& scales,
           std::size_t max_scales, std::uint64_t seed, bool normalize) {
            const auto cfg = config_from_kwargs(rank, lambda_graph, lambda_coupling, lambda_ridge,
                                                alpha, margin, tol_inner, tol_outer, max_inner,
                                                max_outer, scale_mode, scales, max_scales, seed,
                                                normalize);
            return dict_from_result(pnmf::solver::solve_pnmf(matrix_from_samples(x), cfg));
        },
        py::arg("x"), py::arg("rank") = 0, py::arg("lambda_graph") = 1.0,
        py::arg("lambda_coupling") = 1.0, py::arg("lambda_ridge") = 1.0, py::arg("alpha") = 1.5,
        py::arg("margin") = 0.05, py::arg("tol_inner") = 1e-4, py::arg("tol_outer") = 1e-4,
        py::arg("max_inner") = 200, py::arg("max_outer") = 50,
        py::arg("scale_mode") = "canonical", py::arg("scales") = std::vector<double>{},
        py::arg("max_scales") = 0, py::arg("seed") = 0, py::arg("normalize") = true,
        "Coupled multi-scale factorization; returns scales, per-scale basis "
        "(n_features x rank) and embedding (n_samples x rank), the objective trace "
        "and per-subproblem exit records.");

    m.def(
        "solve_nmf",
        [](const py::array_t<double>& x, std::size_t rank, double tol, std::size_t max_inner,
           std::uint64_t seed, bool normalize) {
            pnmf::solver::SolverConfig cfg;
            cfg.tol_inner = tol;
            cfg.max_inner = max_inner;
            cfg.seed = seed;
            cfg.normalize_output = normalize;
            return dict_from_result(pnmf::solver::solve_nmf(matrix_from_samples(x), rank, cfg));
        },
        py::arg("x"), py::arg("rank") = 0, py::arg("tol") = 1e-4, py::arg("max_inner") = 200,
        py::arg("seed") = 0, py::arg("normalize") = true,
        "Plain single-matrix baseline (all regularizers off).");

    m.def(
        "solve_gnmf",
        [](const py::array_t<double>& x, double eps, std::size_t rank, double lambda_graph,
           double alpha, double tol, std::size_t max_inner, std::uint64_t seed, bool normalize) {
            pnmf::solver::SolverConfig cfg;
            cfg.alpha = alpha;
            cfg.tol_inner = tol;
            cfg.max_inner = max_inner;
            cfg.seed = seed;
            cfg.normalize_output = normalize;
            const pnmf::DenseMatrix data = matrix_from_samples(x);
            const auto graph =
                pnmf::scalegraph::build_graph(pnmf::pairwise_distances(data), eps, alpha);
            return dict_from_result(
                pnmf::solver::solve_gnmf(data, graph, rank, lambda_graph, cfg));
        },
        py::arg("x"), py::arg("eps"), py::arg("rank") = 0, py::arg("lambda_graph") = 1.0,
        py::arg("alpha") = 1.5, py::arg("tol") = 1e-4, py::arg("max_inner") = 200,
        py::arg("seed") = 0, py::arg("normalize") = true,
        "Single-scale graph-regularized baseline at a fixed scale.");

    m.def(
        "kmeans",
        [](const py::array_t<double>& points, std::size_t k, std::size_t restarts,
           std::uint64_t seed) {
            const auto buf = points.request();
            if (buf.ndim != 2)
                throw std::invalid_argument("points must be 2d (n_samples, n_features)");
            pnmf::DenseMatrix pts(static_cast<std::size_t>(buf.shape[0]),
                                  static_cast<std::size_t>(buf.shape[1]));
            const double* data = static_cast<const double*>(buf.ptr);
            const auto rs = static_cast<std::size_t>(buf.strides[0] / sizeof(double));
            const auto cs = static_cast<std::size_t>(buf.strides[1] / sizeof(double));
            for (std::size_t i = 0; i < pts.rows(); ++i)
                for (std::size_t j = 0; j < pts.cols(); ++j) pts(i, j) = data[i * rs + j * cs];
            pnmf::evaluation::KMeansConfig cfg;
            cfg.restarts = restarts;
            cfg.seed = seed;
            const auto result = pnmf::evaluation::kmeans(pts, k, cfg);
            py::array_t<int> labels(result.labels.size());
            std::memcpy(labels.mutable_data(), result.labels.data(),
                        result.labels.size() * sizeof(int));
            return py::make_tuple(labels, result.inertia);
        },
        py::arg("points"), py::arg("k"), py::arg("restarts") = 10, py::arg("seed") = 0,
        "Restarted Lloyd iteration; returns (labels, inertia).");

    m.def(
        "ari",
        [](const py::array_t<int>& truth, const py::array_t<int>& predicted) {
            return pnmf::evaluation::adjusted_rand_index(labels_from_array(truth),
                                                         labels_from_array(predicted));
        },
        py::arg("truth"), py::arg("predicted"));
    m.def(
        "nmi",
        [](const py::array_t<int>& truth, const py::array_t<int>& predicted) {
            return pnmf::evaluation::normalized_mutual_information(labels_from_array(truth),
                                                                   labels_from_array(predicted));
        },
        py::arg("truth"), py::arg("predicted"));
    m.def(
        "purity",
        [](const py::array_t<int>& truth, const py::array_t<int>& predicted) {
            return pnmf::evaluation::purity(labels_from_array(truth),
                                            labels_from_array(predicted));
        },
        py::arg("truth"), py::arg("predicted"));
    m.def(
        "accuracy",
        [](const py::array_t<int>& truth, const py::array_t<int>& predicted) {
            return pnmf::evaluation::accuracy(labels_from_array(truth),
                                              labels_from_array(predicted));
        },
        py::arg("truth"), py::arg("predicted"));

    m.def(
        "make_circles",
        [](std::size_t rings, std::size_t points_per_ring, double radius_step, double noise,
           std::size_t ambient_dim, double ambient_noise, std::uint64_t seed) {
            pnmf::datagen::CirclesConfig cfg;
            cfg.rings = rings;
            cfg.points_per_ring = points_per_ring;
            cfg.radius_step = radius_step;
            cfg.noise = noise;
            cfg.ambient_dim = ambient_dim;
            cfg.ambient_noise = ambient_noise;
            cfg.seed = seed;
            const auto data = pnmf::datagen::concentric_circles(cfg);
            py::array_t<int> labels(data.labels.size());
            std::memcpy(labels.mutable_data(), data.labels.data(),
                        data.labels.size() * sizeof(int));
            return py::make_tuple(array_from_matrix(pnmf::transpose(data.x)), labels);
        },
        py::arg("rings") = 4, py::arg("points_per_ring") = 20, py::arg("radius_step") = 1.0,
        py::arg("noise") = 0.05, py::arg("ambient_dim") = 100, py::arg("ambient_noise") = 0.05,
        py::arg("seed") = 0, "Concentric noisy rings; returns (x, labels) with samples in rows.");

    m.def(
        "make_blobs",
        [](std::size_t clusters, std::size_t points_per_cluster, std::size_t dim, double noise,
           double separation, std::uint64_t seed) {
            pnmf::datagen::BlobsConfig cfg;
            cfg.clusters = clusters;
            cfg.points_per_cluster = points_per_cluster;
            cfg.dim = dim;
            cfg.noise = noise;
            cfg.separation = separation;
            cfg.seed = seed;
            const auto data = pnmf::datagen::gaussian_blobs(cfg);
            py::array_t<int> labels(data.labels.size());
            std::memcpy(labels.mutable_data(), data.labels.data(),
                        data.labels.size() * sizeof(int));
            return py::make_tuple(array_from_matrix(pnmf::transpose(data.x)), labels);
        },
        py::arg("clusters") = 4, py::arg("points_per_cluster") = 50, py::arg("dim") = 20,
        py::arg("noise") = 1.0, py::arg("separation") = 10.0, py::arg("seed") = 0,
        "Separated isotropic Gaussian clusters; returns (x, labels) with samples in rows.");
}
