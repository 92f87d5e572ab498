#include "pnmf/cli.hpp"

#include "pnmf/csv.hpp"
#include "pnmf/datagen.hpp"
#include "pnmf/errors.hpp"
#include "pnmf/evaluation.hpp"
#include "pnmf/manifest.hpp"
#include "pnmf/matrix.hpp"
#include "pnmf/persistence.hpp"
#include "pnmf/report.hpp"
#include "pnmf/scalegraph.hpp"
#include "pnmf/solver.hpp"
#include "pnmf/validation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pnmf::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolTag = "pnmf 0.1.0";

/// Command-line misuse that CLI11 cannot catch itself; exits with code 2.
struct UsageError : Error {
    using Error::Error;
};

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::size_t threads_from_env() {
    const char* raw = std::getenv("PNMF_THREADS");
    if (raw == nullptr || *raw == '\0') return 1;
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(raw, raw + std::string_view(raw).size(), value);
    if (ec != std::errc{} || *ptr != '\0' || value == 0)
        throw UsageError("PNMF_THREADS must be a positive integer");
    return value;
}

// ---------------------------------------------------------------------------
// Data ingestion shared by every command that reads a data CSV.

struct IngestFlags {
    std::string orientation = "samples-rows";
    bool log1p = false;
    std::size_t top_variance = 0;     ///< 0 keeps all features
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& f) {
    cmd->add_option("--orientation", f.orientation, "data CSV layout")
        ->check(CLI::IsMember({"samples-rows", "features-rows"}))
        ->capture_default_str();
    cmd->add_flag("--log1p", f.log1p, "apply log(1 + x) to every entry (count matrices)");
    cmd->add_option("--top-variance-genes", f.top_variance,
                    "keep only the k highest-variance features (0 = all)")
        ->capture_default_str();
}

/// Loads a data CSV into the internal layout (features x samples, one sample
/// per column). log1p runs before variance selection; selected features keep
/// their original order.
DenseMatrix load_data(const fs::path& path, const IngestFlags& f) {
    const DenseMatrix raw = io::read_matrix_csv(path);
    DenseMatrix x = f.orientation == "features-rows" ? raw : transpose(raw);

    if (f.log1p) {
        for (double& v : x.values()) {
            if (v < 0.0)
                throw ValidationError("--log1p requires nonnegative data");
            v = std::log1p(v);
        }
    }

    if (f.top_variance > 0 && f.top_variance < x.rows()) {
        std::vector<std::pair<double, std::size_t>> spread(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) mean += x(i, j);
            mean /= static_cast<double>(x.cols());
            double var = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double d = x(i, j) - mean;
                var += d * d;
            }
            spread[i] = {var, i};
        }
        std::sort(spread.begin(), spread.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::vector<std::size_t> keep(f.top_variance);
        for (std::size_t r = 0; r < f.top_variance; ++r) keep[r] = spread[r].second;
        std::sort(keep.begin(), keep.end());

        DenseMatrix filtered(f.top_variance, x.cols());
        for (std::size_t r = 0; r < keep.size(); ++r)
            for (std::size_t j = 0; j < x.cols(); ++j) filtered(r, j) = x(keep[r], j);
        x = std::move(filtered);
    }
    return x;
}

void record_ingest(io::RunManifest& m, const IngestFlags& f) {
    m.parameters["log1p"] = f.log1p ? "true" : "false";
    m.parameters["orientation"] = f.orientation;
    m.parameters["top_variance_genes"] = std::to_string(f.top_variance);
}

IngestFlags ingest_from_params(const std::map<std::string, std::string>& p) {
    IngestFlags f;
    if (auto it = p.find("orientation"); it != p.end()) f.orientation = it->second;
    if (auto it = p.find("log1p"); it != p.end()) f.log1p = it->second == "true";
    if (auto it = p.find("top_variance_genes"); it != p.end())
        f.top_variance = static_cast<std::size_t>(std::stoull(it->second));
    return f;
}

double param_number(const std::map<std::string, std::string>& p, const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end())
        throw IoError("run manifest is missing parameter '" + key + "'");
    return std::stod(it->second);
}

// ---------------------------------------------------------------------------
// Solver configuration shared by factorize and verify.

struct SolverFlags {
    std::size_t rank = 0;
    double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 1.0;
    double alpha = 1.5, margin = 0.05;
    double tol_inner = 1e-4, tol_outer = 1e-4;
    std::size_t max_inner = 200, max_outer = 50, max_scales = 0;
    std::uint64_t seed = 0;
    std::string scale_mode = "canonical";
    std::string scales_file;
    std::string preset;
    bool no_geom = false, no_smooth = false, no_anchor = false;

    CLI::Option* opt_rank = nullptr;
    CLI::Option* opt_l1 = nullptr;
    CLI::Option* opt_l2 = nullptr;
    CLI::Option* opt_l3 = nullptr;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
    f.opt_rank = cmd->add_option("--d,-d", f.rank, "latent dimension (0 = ceil(sqrt(n)))")
                     ->capture_default_str();
    f.opt_l1 = cmd->add_option("--lambda1", f.lambda1, "graph regularization weight")
                   ->capture_default_str();
    f.opt_l2 = cmd->add_option("--lambda2", f.lambda2, "cross-scale coupling weight")
                   ->capture_default_str();
    f.opt_l3 = cmd->add_option("--lambda3", f.lambda3, "ridge anchoring weight")
                   ->capture_default_str();
    cmd->add_option("--alpha", f.alpha, "adjacency kernel exponent")->capture_default_str();
    cmd->add_option("--margin", f.margin, "relative margin of the terminal scale")
        ->capture_default_str();
    cmd->add_option("--scale-mode", f.scale_mode, "scale selection strategy")
        ->check(CLI::IsMember({"canonical", "uds", "rds", "mss", "file"}))
        ->capture_default_str();
    cmd->add_option("--scales-file", f.scales_file, "explicit scales CSV for --scale-mode file");
    cmd->add_option("--max-scales", f.max_scales, "cap on the number of scales (0 = no cap)")
        ->capture_default_str();
    cmd->add_option("--tol-inner", f.tol_inner, "inner relative-change tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-outer", f.tol_outer, "outer relative-change tolerance")
        ->capture_default_str();
    cmd->add_option("--max-inner", f.max_inner, "inner iteration cap")->capture_default_str();
    cmd->add_option("--max-outer", f.max_outer, "outer sweep cap")->capture_default_str();
    cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
    cmd->add_option("--preset", f.preset, "named parameter set")
        ->check(CLI::IsMember({"simulation", "clustering"}));
    cmd->add_flag("--no-geom", f.no_geom, "drop the graph term (lambda1 = 0)");
    cmd->add_flag("--no-smooth", f.no_smooth, "drop the coupling term (lambda2 = 0)");
    cmd->add_flag("--no-anchor", f.no_anchor, "drop the ridge term (lambda3 = 0)");
}

solver::ScaleMode parse_scale_mode(const std::string& name) {
    if (name == "canonical") return solver::ScaleMode::canonical;
    if (name == "uds") return solver::ScaleMode::uds;
    if (name == "rds") return solver::ScaleMode::rds;
    if (name == "mss") return solver::ScaleMode::mss;
    return solver::ScaleMode::explicit_list;
}

/// Preset first, explicit flags second, ablation shorthands last.
solver::SolverConfig resolve_solver_config(const SolverFlags& f, std::size_t threads) {
    solver::SolverConfig cfg;
    cfg.rank = f.rank;
    cfg.lambda_graph = f.lambda1;
    cfg.lambda_coupling = f.lambda2;
    cfg.lambda_ridge = f.lambda3;

    if (f.preset == "simulation") {
        cfg.lambda_graph = 100.0;
        cfg.lambda_coupling = 100.0;
        cfg.lambda_ridge = 1.0;
        cfg.rank = 2;
    } else if (f.preset == "clustering") {
        cfg.lambda_graph = 1.0;
        cfg.lambda_coupling = 1.0;
        cfg.lambda_ridge = 1.0;
        cfg.rank = 0;
    }
    if (f.opt_rank->count() > 0) cfg.rank = f.rank;
    if (f.opt_l1->count() > 0) cfg.lambda_graph = f.lambda1;
    if (f.opt_l2->count() > 0) cfg.lambda_coupling = f.lambda2;
    if (f.opt_l3->count() > 0) cfg.lambda_ridge = f.lambda3;

    cfg.alpha = f.alpha;
    cfg.margin = f.margin;
    cfg.tol_inner = f.tol_inner;
    cfg.tol_outer = f.tol_outer;
    cfg.max_inner = f.max_inner;
    cfg.max_outer = f.max_outer;
    cfg.max_scales = f.max_scales;
    cfg.seed = f.seed;
    cfg.scale_mode = parse_scale_mode(f.scale_mode);
    cfg.threads = threads;

    if (f.no_geom) cfg.lambda_graph = 0.0;
    if (f.no_smooth) cfg.lambda_coupling = 0.0;
    if (f.no_anchor) cfg.lambda_ridge = 0.0;

    if (cfg.scale_mode == solver::ScaleMode::explicit_list && f.scales_file.empty())
        throw UsageError("--scale-mode file requires --scales-file");
    return cfg;
}

void record_solver_config(io::RunManifest& m, const solver::SolverConfig& cfg,
                          const SolverFlags& f) {
    m.parameters["alpha"] = io::format_double(cfg.alpha);
    m.parameters["init"] = cfg.init == solver::SolverConfig::Init::shared_nndsvda
                               ? "shared_nndsvda"
                               : "per_scale_random";
    m.parameters["lambda1"] = io::format_double(cfg.lambda_graph);
    m.parameters["lambda2"] = io::format_double(cfg.lambda_coupling);
    m.parameters["lambda3"] = io::format_double(cfg.lambda_ridge);
    m.parameters["margin"] = io::format_double(cfg.margin);
    m.parameters["max_inner"] = std::to_string(cfg.max_inner);
    m.parameters["max_outer"] = std::to_string(cfg.max_outer);
    m.parameters["max_scales"] = std::to_string(cfg.max_scales);
    m.parameters["normalize"] = cfg.normalize_output ? "true" : "false";
    m.parameters["preset"] = f.preset.empty() ? "none" : f.preset;
    m.parameters["rank"] = std::to_string(cfg.rank);
    m.parameters["scale_mode"] = f.scale_mode;
    m.parameters["tol_inner"] = io::format_double(cfg.tol_inner);
    m.parameters["tol_outer"] = io::format_double(cfg.tol_outer);
}

// ---------------------------------------------------------------------------
// Manifest plumbing.

io::RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                              std::size_t threads) {
    io::RunManifest m;
    m.tool = kToolTag;
    m.command = command;
    m.timestamp_utc = utc_now();
    m.seed = seed;
    m.threads = threads;
    return m;
}

void add_input(io::RunManifest& m, const fs::path& file) {
    m.inputs.push_back(io::record_file(file, fs::absolute(file).lexically_normal().string()));
}

void add_output(io::RunManifest& m, const fs::path& dir, const std::string& name) {
    m.outputs.push_back(io::record_file(dir / name, name));
}

/// Refuses to clobber a manifest written by a different command; re-running
/// the same command into its own directory stays legal.
void write_command_manifest(const fs::path& dir, const io::RunManifest& m) {
    const fs::path target = dir / "manifest.json";
    if (fs::exists(target)) {
        try {
            const io::RunManifest existing = io::read_manifest(target);
            if (existing.command != m.command)
                throw IoError("refusing to overwrite " + target.string() +
                              " written by command '" + existing.command + "'");
        } catch (const IoError& e) {
            if (std::string(e.what()).find("refusing") != std::string::npos) throw;
            // unreadable manifest: overwrite
        }
    }
    io::write_manifest(target, m);
}

fs::path ensure_dir(const std::string& dir) {
    const fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create directory " + p.string() + ": " + ec.message());
    return p;
}

std::string numbered(const char* prefix, std::size_t index1) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s_%04zu.csv", prefix, index1);
    return buf;
}

// ---------------------------------------------------------------------------
// gen

struct GenState {
    std::string generator;
    std::string out;
    std::uint64_t seed = 0;
    datagen::CirclesConfig circles;
    datagen::BlobsConfig blobs;
};

void run_gen(const GenState& st) {
    const std::size_t threads = threads_from_env();
    datagen::LabeledDataset data;
    io::RunManifest manifest = make_manifest("gen", st.seed, threads);
    manifest.parameters["generator"] = st.generator;

    if (st.generator == "circles") {
        datagen::CirclesConfig cfg = st.circles;
        cfg.seed = st.seed;
        data = datagen::concentric_circles(cfg);
        manifest.parameters["ambient_dim"] = std::to_string(cfg.ambient_dim);
        manifest.parameters["ambient_noise"] = io::format_double(cfg.ambient_noise);
        manifest.parameters["noise"] = io::format_double(cfg.noise);
        manifest.parameters["points_per_ring"] = std::to_string(cfg.points_per_ring);
        manifest.parameters["radius_step"] = io::format_double(cfg.radius_step);
        manifest.parameters["rings"] = std::to_string(cfg.rings);
    } else {
        datagen::BlobsConfig cfg = st.blobs;
        cfg.seed = st.seed;
        data = datagen::gaussian_blobs(cfg);
        manifest.parameters["clusters"] = std::to_string(cfg.clusters);
        manifest.parameters["dim"] = std::to_string(cfg.dim);
        manifest.parameters["noise"] = io::format_double(cfg.noise);
        manifest.parameters["points_per_cluster"] = std::to_string(cfg.points_per_cluster);
        manifest.parameters["separation"] = io::format_double(cfg.separation);
    }
    manifest.parameters["shift"] = io::format_double(data.shift);

    const fs::path dir = ensure_dir(st.out);
    const std::string comment = "generator=" + data.generator +
                                " seed=" + std::to_string(data.seed) +
                                " shift=" + io::format_double(data.shift) +
                                "\nrows=samples columns=features";
    io::write_matrix_csv(dir / "data.csv", transpose(data.x), comment);
    io::write_labels_csv(dir / "labels.csv", data.labels, "class label per sample row");
    add_output(manifest, dir, "data.csv");
    add_output(manifest, dir, "labels.csv");
    write_command_manifest(dir, manifest);
}

// ---------------------------------------------------------------------------
// scales

struct ScalesState {
    std::string data;
    std::string out;
    double margin = 0.05;
    IngestFlags ingest;
};

void run_scales(const ScalesState& st) {
    const std::size_t threads = threads_from_env();
    const DenseMatrix x = load_data(st.data, st.ingest);
    const SymmetricMatrix dist = pairwise_distances(x);
    const double cutoff = persistence::delta_max(dist, st.margin);
    const persistence::H0Diagram diagram = persistence::compute_h0_diagram(dist, cutoff);
    const persistence::ScaleSet canonical = persistence::canonical_scale_set(diagram);
    const persistence::ScaleSet distances = persistence::distance_scale_set(dist, cutoff);

    io::RunManifest manifest = make_manifest("scales", 0, threads);
    record_ingest(manifest, st.ingest);
    manifest.parameters["delta_max"] = io::format_double(cutoff);
    manifest.parameters["margin"] = io::format_double(st.margin);
    add_input(manifest, st.data);

    const std::string source = "source=" + fs::absolute(st.data).lexically_normal().string() +
                               " digest=" + manifest.inputs.front().digest +
                               " margin=" + io::format_double(st.margin);
    const fs::path dir = ensure_dir(st.out);
    io::write_vector_csv(dir / "deaths.csv", diagram.deaths,
                         "connected-component death times, last row is the terminal scale\n" +
                             source);
    std::vector<double> canonical_values(canonical.begin(), canonical.end());
    io::write_vector_csv(dir / "canonical_scales.csv", canonical_values,
                         "canonical scale set (deduplicated death times)\n" + source);
    std::vector<double> distance_values(distances.begin(), distances.end());
    io::write_vector_csv(dir / "distance_scales.csv", distance_values,
                         "distance scale set (deduplicated pairwise distances)\n" + source);
    add_output(manifest, dir, "deaths.csv");
    add_output(manifest, dir, "canonical_scales.csv");
    add_output(manifest, dir, "distance_scales.csv");
    write_command_manifest(dir, manifest);
}

// ---------------------------------------------------------------------------
// factorize

struct FactorizeState {
    std::string data;
    std::string labels;
    std::string out;
    IngestFlags ingest;
    SolverFlags sflags;
};

void run_factorize(const FactorizeState& st) {
    const std::size_t threads = threads_from_env();
    const DenseMatrix x = load_data(st.data, st.ingest);
    solver::SolverConfig cfg = resolve_solver_config(st.sflags, threads);

    io::RunManifest manifest = make_manifest("factorize", cfg.seed, threads);
    record_ingest(manifest, st.ingest);
    record_solver_config(manifest, cfg, st.sflags);
    add_input(manifest, st.data);

    if (!st.labels.empty()) {
        const std::vector<int> labels = io::read_labels_csv(st.labels);
        if (labels.size() != x.cols())
            throw ValidationError("labels length " + std::to_string(labels.size()) +
                                  " does not match sample count " + std::to_string(x.cols()));
        add_input(manifest, st.labels);
    }
    if (cfg.scale_mode == solver::ScaleMode::explicit_list) {
        cfg.explicit_scales = io::read_vector_csv(st.sflags.scales_file);
        add_input(manifest, st.sflags.scales_file);
    }

    const solver::MultiScaleFactors result = solver::solve_pnmf(x, cfg);
    manifest.parameters["converged"] = result.converged ? "true" : "false";
    manifest.parameters["outer_iterations"] = std::to_string(result.outer_iterations);
    manifest.parameters["rank_resolved"] =
        std::to_string(result.pairs.front().h.rows());
    manifest.parameters["scale_count"] = std::to_string(result.scales.size());
    {
        std::string degenerate;
        for (const auto& [t, col] : result.unnormalized_columns) {
            if (!degenerate.empty()) degenerate += ' ';
            degenerate += std::to_string(t) + ":" + std::to_string(col);
        }
        manifest.parameters["degenerate_columns"] = degenerate;
    }

    const fs::path dir = ensure_dir(st.out);
    for (std::size_t t = 0; t < result.pairs.size(); ++t) {
        const std::string eps = io::format_double(result.scales[t]);
        const std::string wname = numbered("W", t + 1);
        const std::string hname = numbered("H", t + 1);
        io::write_matrix_csv(dir / wname,
                             result.pairs[t].w,
                             "basis factor W (features x components), eps=" + eps);
        io::write_matrix_csv(dir / hname,
                             result.pairs[t].h,
                             "embedding factor H (components x samples), eps=" + eps);
        add_output(manifest, dir, wname);
        add_output(manifest, dir, hname);
    }
    io::write_vector_csv(dir / "scales.csv", result.scales, "model scales, one per row");
    io::write_vector_csv(dir / "objective_trace.csv", result.objective_trace,
                         "coupled objective at every half-step, first row is the initial value");
    DenseMatrix exits(result.exits.size(), 6);
    for (std::size_t i = 0; i < result.exits.size(); ++i) {
        const auto& e = result.exits[i];
        exits(i, 0) = static_cast<double>(e.sweep);
        exits(i, 1) = static_cast<double>(e.scale);
        exits(i, 2) = static_cast<double>(e.inner_iterations);
        exits(i, 3) = e.hit_iteration_cap ? 1.0 : 0.0;
        exits(i, 4) = e.kkt_residual;
        exits(i, 5) = e.objective;
    }
    io::write_matrix_csv(
        dir / "kkt_exits.csv", exits,
        "columns: sweep,scale_index,inner_iterations,hit_iteration_cap,kkt_residual,objective");
    add_output(manifest, dir, "scales.csv");
    add_output(manifest, dir, "objective_trace.csv");
    add_output(manifest, dir, "kkt_exits.csv");
    write_command_manifest(dir, manifest);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateState {
    std::string run;
    std::string labels;
    std::string out;
    std::size_t k = 0;
    std::size_t restarts = 10;
    std::uint64_t seed = 0;
    bool json = false;
};

solver::MultiScaleFactors load_run_factors(const fs::path& run_dir, bool with_w) {
    solver::MultiScaleFactors factors;
    factors.scales = io::read_vector_csv(run_dir / "scales.csv");
    for (std::size_t t = 0; t < factors.scales.size(); ++t) {
        solver::FactorPair pair;
        pair.h = io::read_matrix_csv(run_dir / numbered("H", t + 1));
        if (with_w) pair.w = io::read_matrix_csv(run_dir / numbered("W", t + 1));
        factors.pairs.push_back(std::move(pair));
    }
    return factors;
}

void emit_report(const io::Report& report, bool json, const std::string& out,
                 const std::string& command, std::uint64_t seed,
                 const std::vector<std::string>& input_files) {
    const std::string rendered = json ? report.to_json() : report.to_text();
    std::cout << rendered;
    if (out.empty()) return;

    const fs::path dir = ensure_dir(out);
    const std::string name = json ? "report.json" : "report.txt";
    {
        std::FILE* f = std::fopen((dir / name).c_str(), "wb");
        if (f == nullptr)
            throw IoError("cannot write " + (dir / name).string());
        const std::size_t wrote = std::fwrite(rendered.data(), 1, rendered.size(), f);
        std::fclose(f);
        if (wrote != rendered.size())
            throw IoError("write failed: " + (dir / name).string());
    }
    io::RunManifest manifest = make_manifest(command, seed, threads_from_env());
    for (const auto& file : input_files) add_input(manifest, file);
    add_output(manifest, dir, name);
    write_command_manifest(dir, manifest);
}

void run_evaluate(const EvaluateState& st, int& exit_code) {
    const fs::path run_dir(st.run);
    const io::RunManifest run_manifest = io::read_manifest(run_dir / "manifest.json");
    const solver::MultiScaleFactors factors = load_run_factors(run_dir, false);
    if (factors.pairs.empty())
        throw ValidationError("run directory has no factor files");

    const std::vector<int> labels = io::read_labels_csv(st.labels);
    evaluation::KMeansConfig kmcfg;
    kmcfg.restarts = st.restarts;
    kmcfg.seed = st.seed;
    const evaluation::ScaleSweepReport sweep =
        evaluation::sweep_scales(factors, labels, kmcfg, st.k);

    io::Report report;
    for (const auto& entry : sweep.entries) {
        report.begin_block("scale");
        report.add("scale_index", entry.scale_index);
        report.add("scale", entry.scale);
        report.add("ari", entry.scores.ari);
        report.add("nmi", entry.scores.nmi);
        report.add("purity", entry.scores.purity);
        report.add("accuracy", entry.scores.accuracy);
        report.add("mean", entry.scores.mean());
    }
    report.begin_block("best");
    report.add("scale_index", sweep.best_index);
    report.add("mean", sweep.entries[sweep.best_index].scores.mean());

    if (factors.pairs.size() >= 4) {
        if (run_manifest.inputs.empty())
            throw IoError("run manifest records no input data file");
        const IngestFlags ingest = ingest_from_params(run_manifest.parameters);
        const double alpha = param_number(run_manifest.parameters, "alpha");
        const DenseMatrix x = load_data(run_manifest.inputs.front().path, ingest);
        const SymmetricMatrix dist = pairwise_distances(x);
        const std::vector<scalegraph::ScaleGraph> graphs =
            scalegraph::graph_family(dist, persistence::ScaleSet(factors.scales), alpha);
        const evaluation::IncrementReport increments =
            evaluation::increment_analysis(factors, graphs);

        for (std::size_t i = 0; i < increments.scale_deltas.size(); ++i) {
            report.begin_block("increment");
            report.add("index", i + 1);
            report.add("delta_scale", increments.scale_deltas[i]);
            report.add("delta_laplacian", increments.laplacian_deltas[i]);
            report.add("delta_embedding", increments.embedding_deltas[i]);
        }
        for (const auto& corr : increments.correlations) {
            report.begin_block("correlation");
            report.add("pair", corr.pair);
            if (corr.result.has_value()) {
                report.add("r", corr.result->r);
                report.add("p", corr.result->p_value);
                report.add("n", static_cast<std::size_t>(corr.result->n));
            } else {
                report.add("note", corr.note);
            }
        }
    } else {
        report.begin_block("increments_skipped");
        report.add("note", "increment analysis needs at least four scales");
    }

    std::vector<std::string> inputs{(run_dir / "manifest.json").string(), st.labels};
    emit_report(report, st.json, st.out, "evaluate", st.seed, inputs);
    exit_code = 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyState {
    std::string run;
    std::string data;
    std::string out;
    std::string checks = "scale,lipschitz,spectral,solver,bounds";
    std::size_t grid = 1000;
    std::size_t samples_per_interval = 3;
    bool json = false;
    IngestFlags ingest;
    SolverFlags sflags;
};

std::set<std::string> parse_checks(const std::string& csv) {
    const std::set<std::string> known{"scale", "lipschitz", "spectral", "solver", "bounds"};
    std::set<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::size_t end = comma == std::string::npos ? csv.size() : comma;
        std::string token = csv.substr(start, end - start);
        std::erase(token, ' ');
        if (!token.empty()) {
            if (!known.contains(token))
                throw UsageError("unknown check '" + token + "'");
            out.insert(token);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty())
        throw UsageError("--checks selected nothing");
    return out;
}

solver::SubproblemExit exit_from_row(const DenseMatrix& m, std::size_t i) {
    solver::SubproblemExit e;
    e.sweep = static_cast<std::size_t>(m(i, 0));
    e.scale = static_cast<std::size_t>(m(i, 1));
    e.inner_iterations = static_cast<std::size_t>(m(i, 2));
    e.hit_iteration_cap = m(i, 3) != 0.0;
    e.kkt_residual = m(i, 4);
    e.objective = m(i, 5);
    return e;
}

void run_verify(const VerifyState& st, int& exit_code) {
    const std::set<std::string> wanted = parse_checks(st.checks);
    const std::size_t threads = threads_from_env();
    const bool from_run = !st.run.empty();
    if (!from_run && st.data.empty())
        throw UsageError("verify needs --data or --run");

    io::RunManifest run_manifest;
    IngestFlags ingest = st.ingest;
    double alpha = st.sflags.alpha;
    double margin = st.sflags.margin;
    std::string data_path = st.data;
    if (from_run) {
        run_manifest = io::read_manifest(fs::path(st.run) / "manifest.json");
        if (run_manifest.inputs.empty())
            throw IoError("run manifest records no input data file");
        data_path = run_manifest.inputs.front().path;
        ingest = ingest_from_params(run_manifest.parameters);
        alpha = param_number(run_manifest.parameters, "alpha");
        margin = param_number(run_manifest.parameters, "margin");
    }

    const DenseMatrix x = load_data(data_path, ingest);
    const SymmetricMatrix dist = pairwise_distances(x);
    const double cutoff = persistence::delta_max(dist, margin);

    std::vector<validation::TheoremReport> reports;
    if (wanted.contains("scale"))
        reports.push_back(validation::verify_scale_set(dist, cutoff, st.grid));

    if (wanted.contains("lipschitz") || wanted.contains("spectral")) {
        const persistence::ScaleSet canonical =
            persistence::canonical_scale_set(persistence::compute_h0_diagram(dist, cutoff));
        if (wanted.contains("lipschitz"))
            reports.push_back(validation::verify_laplacian_lipschitz(
                dist, canonical, st.samples_per_interval, alpha));
        if (wanted.contains("spectral"))
            reports.push_back(validation::verify_spectral(dist, canonical, alpha));
    }

    if (wanted.contains("solver") || wanted.contains("bounds")) {
        if (from_run) {
            const fs::path run_dir(st.run);
            if (wanted.contains("solver")) {
                solver::MultiScaleFactors stored;
                stored.objective_trace = io::read_vector_csv(run_dir / "objective_trace.csv");
                const DenseMatrix exits = io::read_matrix_csv(run_dir / "kkt_exits.csv");
                if (exits.cols() != 6)
                    throw IoError("kkt_exits.csv must have 6 columns");
                for (std::size_t i = 0; i < exits.rows(); ++i)
                    stored.exits.push_back(exit_from_row(exits, i));
                reports.push_back(validation::verify_solver(
                    stored, frobenius_norm(x),
                    param_number(run_manifest.parameters, "tol_inner")));
            }
            if (wanted.contains("bounds")) {
                const solver::MultiScaleFactors factors = load_run_factors(run_dir, true);
                const std::vector<scalegraph::ScaleGraph> graphs = scalegraph::graph_family(
                    dist, persistence::ScaleSet(factors.scales), alpha);
                solver::SolverConfig cfg;
                cfg.lambda_graph = param_number(run_manifest.parameters, "lambda1");
                cfg.lambda_coupling = param_number(run_manifest.parameters, "lambda2");
                cfg.lambda_ridge = param_number(run_manifest.parameters, "lambda3");
                reports.push_back(validation::verify_increment_bounds(x, factors, graphs, cfg));
            }
        } else {
            solver::SolverConfig cfg = resolve_solver_config(st.sflags, threads);
            cfg.normalize_output = false;
            if (cfg.scale_mode == solver::ScaleMode::explicit_list)
                cfg.explicit_scales = io::read_vector_csv(st.sflags.scales_file);
            const solver::MultiScaleFactors result = solver::solve_pnmf(x, cfg);
            if (wanted.contains("solver"))
                reports.push_back(
                    validation::verify_solver(result, frobenius_norm(x), cfg.tol_inner));
            if (wanted.contains("bounds")) {
                const std::vector<scalegraph::ScaleGraph> graphs = scalegraph::graph_family(
                    dist, persistence::ScaleSet(result.scales), cfg.alpha);
                reports.push_back(validation::verify_increment_bounds(x, result, graphs, cfg));
            }
        }
    }

    std::sort(reports.begin(), reports.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });

    io::Report report;
    bool all_passed = true;
    for (const auto& r : reports) {
        report.begin_block(r.name);
        report.add("passed", r.passed);
        report.add("applicable", r.applicable);
        report.add("instance", r.instance);
        report.add("detail", r.detail);
        for (const auto& [key, value] : r.observed) report.add(key, value);
        all_passed = all_passed && r.passed;
    }

    std::vector<std::string> inputs;
    if (from_run)
        inputs.push_back((fs::path(st.run) / "manifest.json").string());
    else
        inputs.push_back(st.data);
    emit_report(report, st.json, st.out, "verify", st.sflags.seed, inputs);
    exit_code = all_passed ? 0 : 1;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"persistence-guided multi-scale nonnegative matrix factorization"};
    app.name("pnmf");
    app.set_version_flag("--version", std::string(kToolTag));
    app.require_subcommand(1);
    int exit_code = 0;

    GenState gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a synthetic labeled dataset");
    cmd_gen->add_option("--generator", gen.generator, "dataset family")
        ->check(CLI::IsMember({"circles", "blobs"}))
        ->required();
    cmd_gen->add_option("--out", gen.out, "output directory")->required();
    cmd_gen->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    cmd_gen->add_option("--rings", gen.circles.rings)->capture_default_str();
    cmd_gen->add_option("--points-per-ring", gen.circles.points_per_ring)->capture_default_str();
    cmd_gen->add_option("--radius-step", gen.circles.radius_step)->capture_default_str();
    cmd_gen->add_option("--ambient-dim", gen.circles.ambient_dim)->capture_default_str();
    cmd_gen->add_option("--ambient-noise", gen.circles.ambient_noise)->capture_default_str();
    cmd_gen->add_option("--clusters", gen.blobs.clusters)->capture_default_str();
    cmd_gen->add_option("--points-per-cluster", gen.blobs.points_per_cluster)
        ->capture_default_str();
    cmd_gen->add_option("--dim", gen.blobs.dim)->capture_default_str();
    cmd_gen->add_option("--separation", gen.blobs.separation)->capture_default_str();
    CLI::Option* gen_noise = cmd_gen->add_option("--noise", gen.circles.noise,
                                                 "jitter (circles) or cluster sd (blobs)");
    cmd_gen->callback([&] {
        if (gen_noise->count() > 0) gen.blobs.noise = gen.circles.noise;
        run_gen(gen);
    });

    ScalesState scales;
    CLI::App* cmd_scales =
        app.add_subcommand("scales", "persistence diagram and scale sets of a dataset");
    cmd_scales->add_option("--data", scales.data, "data CSV")->required();
    cmd_scales->add_option("--out", scales.out, "output directory")->required();
    cmd_scales->add_option("--margin", scales.margin, "relative margin of the terminal scale")
        ->capture_default_str();
    add_ingest_flags(cmd_scales, scales.ingest);
    cmd_scales->callback([&] { run_scales(scales); });

    FactorizeState fact;
    CLI::App* cmd_fact = app.add_subcommand("factorize", "multi-scale factorization run");
    cmd_fact->add_option("--data", fact.data, "data CSV")->required();
    cmd_fact->add_option("--labels", fact.labels, "labels CSV, recorded for evaluation");
    cmd_fact->add_option("--out", fact.out, "run directory")->required();
    add_ingest_flags(cmd_fact, fact.ingest);
    add_solver_flags(cmd_fact, fact.sflags);
    cmd_fact->callback([&] { run_factorize(fact); });

    EvaluateState eval;
    CLI::App* cmd_eval = app.add_subcommand("evaluate", "cluster and score a finished run");
    cmd_eval->add_option("--run", eval.run, "factorize run directory")->required();
    cmd_eval->add_option("--labels", eval.labels, "ground-truth labels CSV")->required();
    cmd_eval->add_option("--k", eval.k, "cluster count (0 = distinct labels)")
        ->capture_default_str();
    cmd_eval->add_option("--restarts", eval.restarts, "k-means restarts")->capture_default_str();
    cmd_eval->add_option("--seed", eval.seed, "k-means seed")->capture_default_str();
    cmd_eval->add_flag("--json", eval.json, "emit the report as JSON");
    cmd_eval->add_option("--out", eval.out, "directory for the report file");
    cmd_eval->callback([&] { run_evaluate(eval, exit_code); });

    VerifyState verify;
    CLI::App* cmd_verify = app.add_subcommand("verify", "run executable theorem checks");
    cmd_verify->add_option("--data", verify.data, "data CSV for fresh checks");
    cmd_verify->add_option("--run", verify.run, "reuse a factorize run directory");
    cmd_verify->add_option("--checks", verify.checks, "comma-separated subset")
        ->capture_default_str();
    cmd_verify->add_option("--grid-size", verify.grid, "sufficiency grid resolution")
        ->capture_default_str();
    cmd_verify
        ->add_option("--samples-per-interval", verify.samples_per_interval,
                     "Lipschitz probes per interval")
        ->capture_default_str();
    cmd_verify->add_flag("--json", verify.json, "emit the report as JSON");
    cmd_verify->add_option("--out", verify.out, "directory for the report file");
    add_ingest_flags(cmd_verify, verify.ingest);
    add_solver_flags(cmd_verify, verify.sflags);
    cmd_verify->callback([&] { run_verify(verify, exit_code); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_code;
}

} // namespace pnmf::cli
