#include "pdmd/cli.hpp"

#include "pdmd/archive.hpp"
#include "pdmd/benchmarks.hpp"
#include "pdmd/model_io.hpp"
#include "pdmd/parametric.hpp"
#include "pdmd/sensitivity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace pdmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

// JSON config files: top-level keys are global options, objects named after
// a subcommand hold that subcommand's options. Explicit flags win.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json root;
        try {
            input >> root;
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!root.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        flatten(root, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number()) return num(v.get<double>());
        throw CLI::ConversionError("unsupported config value " + v.dump());
    }

    static void flatten(const json& obj, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                items.push_back({next, "++", {}});
                flatten(value, next, items);
                items.push_back({next, "--", {}});
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct Globals {
    std::uint64_t seed = 42;
    bool quiet = false;
};

struct DmdFlags {
    Eigen::Index svd_rank = 0;
    int depth = 1;
    std::optional<double> stabilize;
    std::string amplitudes = "first-snapshot";

    void add_to(CLI::App* app) {
        app->add_option("--svd-rank", svd_rank, "DMD truncation rank (0 = automatic threshold)")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--hodmd-depth", depth, "number of lagged snapshots stacked (1 = standard DMD)");
        app->add_option("--stabilize", stabilize, "unit-circle tolerance for eigenvalue stabilization");
        app->add_option("--amplitudes", amplitudes, "amplitude fit: first-snapshot or least-squares-all")
            ->check(CLI::IsMember({"first-snapshot", "least-squares-all"}));
    }

    DmdConfig config() const {
        if (depth < 1) throw UsageError("--hodmd-depth must be >= 1, got " + std::to_string(depth));
        if (stabilize && !(*stabilize >= 0.0)) throw UsageError("--stabilize must be a non-negative tolerance");
        DmdConfig c;
        c.svd_rank = svd_rank;
        c.hodmd_depth = depth;
        c.stabilization = stabilize;
        c.amplitude_strategy = amplitude_strategy_from_string(amplitudes);
        return c;
    }
};

struct RegressorFlags {
    std::string kind = "linear";
    std::optional<double> lengthscale;
    std::optional<double> noise;
    CLI::Option* kind_opt = nullptr;

    void add_to(CLI::App* app) {
        kind_opt = app->add_option("--regressor", kind, "linear, nearest, cubic, rbf or gpr")
                       ->check(CLI::IsMember({"linear", "nearest", "cubic", "cubic-1d", "rbf", "gpr"}));
        app->add_option("--gpr-lengthscale", lengthscale, "GPR kernel lengthscale")->check(CLI::PositiveNumber);
        app->add_option("--gpr-noise", noise, "GPR noise standard deviation")->check(CLI::NonNegativeNumber);
    }

    bool given() const { return kind_opt->count() > 0 || lengthscale || noise; }

    OnlineSettings settings() const {
        return OnlineSettings{regressor_kind_from_string(kind), RegressorOptions{lengthscale, noise}};
    }
};

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (std::int64_t v : parse_label_list(text)) {
        if (v < 0) throw UsageError("negative member index in '" + text + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void check_indices(const std::vector<std::size_t>& idx, std::size_t p, const char* what) {
    for (std::size_t i : idx) {
        if (i >= p) {
            throw UsageError(std::string(what) + " index " + std::to_string(i) + " out of range (archive has " +
                             std::to_string(p) + " members)");
        }
    }
    if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size()) {
        throw UsageError(std::string(what) + " indices contain duplicates");
    }
}

void print_set_summary(std::ostream& out, const ParametricSnapshotSet& set) {
    out << "p=" << set.p() << " m=" << set.m() << " N=" << set.time_axis.count << " dt=" << std::setprecision(3)
        << set.time_axis.dt << (set.is_real() ? " real" : " complex") << '\n'
        << std::setprecision(6);
}

Dtype choose_dtype(const std::string& name, const ParametricSnapshotSet& set) {
    if (name == "auto") return set.is_real() ? Dtype::real64 : Dtype::complex128;
    return dtype_from_string(name);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::string spectrum_summary(const DmdModel& op) {
    std::size_t on = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index i = 0; i < op.eigenvalues.size(); ++i) {
        const double a = std::abs(op.eigenvalues(i));
        if (std::abs(a - 1.0) <= 1e-6) ++on;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    std::size_t discarded = 0;
    for (const auto& e : op.stabilization_record) discarded += e.retained() ? 0 : 1;
    std::ostringstream s;
    s << op.eigenvalues.size() << " eigenvalues, " << on << " on unit circle, "
      << static_cast<std::size_t>(op.eigenvalues.size()) - on << " off";
    if (op.eigenvalues.size() > 0) s << " (|lambda| in [" << num(lo) << ", " << num(hi) << "])";
    if (!op.stabilization_record.empty()) s << ", " << discarded << " discarded by stabilization";
    return s.str();
}

// ----------------------------------------------------------------- generate

struct GenerateFlags {
    std::string problem;
    std::string out;
    std::string dtype = "auto";
    // toy
    Eigen::Index m = 1000;
    Eigen::Index count = 0;
    std::int64_t label_count = 0;
    std::vector<double> mu;
    // heat
    std::size_t params = 20;
    std::size_t held_out = 0;
    std::string held_out_out;
    int grid = 31;
    std::int64_t labels = 101;
    int substeps = 10;
    double source_scale = 1.0;
    // synthetic
    Eigen::Index state_dim = 6;
    double rho = 1.02;
    double fraction = 0.01;
    std::vector<double> angles;
    double unstable_angle = 0.5;
};

int cmd_generate(const GenerateFlags& f, const Globals& g, std::ostream& out) {
    ParametricSnapshotSet set;
    json provenance;
    provenance["problem"] = f.problem;
    provenance["seed"] = g.seed;
    if (f.problem == "toy") {
        ToySpec spec;
        spec.m = f.m;
        if (f.count > 0) spec.N = f.count;
        if (!f.mu.empty()) spec.parameters = f.mu;
        spec.validate();
        set = toy_truth_set(spec, spec.parameters, f.label_count > 0 ? f.label_count : spec.N);
        provenance["m"] = spec.m;
        provenance["N"] = spec.N;
    } else if (f.problem == "heat") {
        HeatSpec spec;
        spec.grid = f.grid;
        spec.label_count = f.labels;
        spec.substeps = f.substeps;
        spec.source_scale = f.source_scale;
        spec.validate();
        if (f.held_out > 0 && f.params < 3) throw UsageError("--held-out needs --params >= 3");
        const HeatParameterDraw draw = draw_heat_parameters(f.params, f.held_out, g.seed);
        set = generate_heat_set(spec, draw.training);
        provenance["grid"] = spec.grid;
        provenance["label_count"] = spec.label_count;
        provenance["substeps"] = spec.substeps;
        provenance["source_scale"] = spec.source_scale;
        if (!draw.held_out.empty()) {
            const fs::path held = f.held_out_out.empty() ? fs::path(f.out + "-heldout") : fs::path(f.held_out_out);
            const ParametricSnapshotSet hset = generate_heat_set(spec, draw.held_out);
            write_archive(hset, held, choose_dtype(f.dtype, hset));
            provenance["held_out_archive"] = held.string();
            if (!g.quiet) {
                out << "held-out archive " << held.string() << ": ";
                print_set_summary(out, hset);
            }
        }
    } else {
        SyntheticUnstableSpec spec;
        spec.state_dim = f.state_dim;
        spec.rho = f.rho;
        spec.fraction = f.fraction;
        if (f.count > 0) spec.count = f.count;
        if (!f.angles.empty()) spec.stable_angles = f.angles;
        spec.unstable_angle = f.unstable_angle;
        spec.seed = g.seed;
        if (!f.mu.empty()) spec.parameters = f.mu;
        spec.validate();
        set = generate_synthetic_unstable(spec);
        provenance["rho"] = spec.rho;
        provenance["fraction"] = spec.fraction;
    }
    write_archive(set, f.out, choose_dtype(f.dtype, set));
    write_text(fs::path(f.out) / "generation.json", provenance.dump(2) + "\n");
    if (!g.quiet) print_set_summary(out, set);
    return exit_ok;
}

// -------------------------------------------------------------------- train

struct TrainFlags {
    std::string archive;
    std::string out;
    std::string variant = "partitioned";
    Eigen::Index pod_rank = 0;
    std::int64_t time_count = -1;
    std::string members;
    DmdFlags dmd;
    RegressorFlags regressor;
};

int cmd_train(const TrainFlags& f, const Globals& g, std::ostream& out) {
    const Variant variant = variant_from_string(f.variant);
    const DmdConfig config = f.dmd.config();
    if (f.pod_rank < 1) throw UsageError("--pod-rank must be >= 1");
    ParametricSnapshotSet set = read_archive(f.archive);
    std::vector<std::size_t> members(set.p());
    std::iota(members.begin(), members.end(), std::size_t{0});
    if (!f.members.empty()) {
        members = parse_index_list(f.members);
        check_indices(members, set.p(), "--members");
    }
    if (f.time_count == 0 || f.time_count > set.time_axis.count) {
        throw UsageError("--time-count must be in [1, " + std::to_string(set.time_axis.count) + "]");
    }
    set = set.select(members, f.time_count);
    const auto model = fit_parametric(set, variant, f.pod_rank, config, f.regressor.settings());
    save_model(model, f.out);
    if (g.quiet) return exit_ok;

    const RealVector& sv = model.pod.singular_values;
    const double total = sv.squaredNorm();
    const double kept = sv.head(model.n()).squaredNorm();
    out << "POD: n=" << model.n() << " of " << sv.size() << " singular values, retained energy "
        << num(total > 0.0 ? kept / total : 1.0) << '\n';
    out << "singular values:";
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sv.size(), 10); ++i) out << ' ' << num(sv(i));
    if (sv.size() > 10) out << " ...";
    out << '\n';
    out << to_string(model.variant) << ": " << model.operators.size() << " operator(s)\n";
    for (std::size_t i = 0; i < model.operators.size(); ++i) {
        out << "operator " << i;
        if (model.variant == Variant::partitioned) out << " mu=" << to_string(model.parameters[i]);
        out << ": " << spectrum_summary(model.operators[i]) << '\n';
    }
    return exit_ok;
}

// ------------------------------------------------------------------ predict

struct PredictFlags {
    std::string model;
    std::vector<double> mu;
    std::string labels;
    std::string out;
    std::string coefficients;
    std::string dtype = "complex128";
    RegressorFlags regressor;
};

int cmd_predict(const PredictFlags& f, const Globals& g, std::ostream& out) {
    const auto labels = parse_label_list(f.labels);
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] != labels[i - 1] + 1) throw UsageError("--labels must be one contiguous ascending range");
    }
    if (f.out.empty() && f.coefficients.empty()) throw UsageError("nothing to write: give --out and/or --coefficients");
    const ParametricDmdModel model = load_model(f.model);
    if (f.mu.size() != model.parameters.front().dim()) {
        throw UsageError("--mu has " + std::to_string(f.mu.size()) + " values, model parameters have dimension " +
                         std::to_string(model.parameters.front().dim()));
    }
    ForecastRequest request{ParameterPoint(f.mu), labels, std::nullopt};
    if (f.regressor.given()) request.regressor = f.regressor.settings();
    const Forecast fc = forecast_full(model, request);

    if (!f.out.empty()) {
        ParametricSnapshotSet set;
        set.field_name = "forecast";
        set.time_axis = TimeAxis{model.time_axis.time_of(labels.front()), model.time_axis.dt,
                                 static_cast<std::int64_t>(labels.size()), labels.front()};
        set.members.push_back({request.parameter, fc.full});
        write_archive(set, f.out, choose_dtype(f.dtype, set));
    }
    const fs::path coeff_path =
        !f.coefficients.empty() ? fs::path(f.coefficients) : fs::path(f.out) / "coefficients.csv";
    std::ostringstream csv;
    csv << "label,time,coeff_index,re,im\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        for (Eigen::Index i = 0; i < fc.reduced.rows(); ++i) {
            const Complex c = fc.reduced(i, static_cast<Eigen::Index>(j));
            csv << labels[j] << ',' << num(model.time_axis.time_of(labels[j])) << ',' << i << ',' << num(c.real())
                << ',' << num(c.imag()) << '\n';
        }
    }
    write_text(coeff_path, csv.str());
    if (!g.quiet) {
        out << "forecast mu=" << to_string(request.parameter) << " labels " << labels.front() << ".."
            << labels.back() << " (" << labels.size() << " snapshots, m=" << fc.full.rows() << ")\n";
    }
    return exit_ok;
}

// ----------------------------------------------------------------- validate

struct ValidateFlags {
    std::string model;
    std::string truth;
    std::string labels;
    std::string out;
    std::string breakdown;
    double forecast_scale = 1.0;
    RegressorFlags regressor;
};

int cmd_validate(const ValidateFlags& f, const Globals& g, std::ostream& out) {
    const auto labels = parse_label_list(f.labels);
    const ParametricDmdModel model = load_model(f.model);
    const ParametricSnapshotSet truth = read_archive(f.truth);
    for (std::int64_t label : labels) {
        if (!truth.time_axis.contains(label)) {
            throw UsageError("truth archive does not cover label " + std::to_string(label) + " (covers " +
                             std::to_string(truth.time_axis.label_origin) + ".." +
                             std::to_string(truth.time_axis.last_label()) + ")");
        }
    }
    if (truth.parameter_dim() != model.parameters.front().dim()) {
        throw UsageError("truth parameters have dimension " + std::to_string(truth.parameter_dim()) +
                         ", model expects " + std::to_string(model.parameters.front().dim()));
    }
    const OnlineSettings settings = f.regressor.given() ? f.regressor.settings() : model.online;

    ErrorReport report;
    if (f.forecast_scale == 1.0) {
        report = compute_error_report(model, truth, labels, settings);
    } else {
        auto forecasts = forecast_many(model, truth.parameters(), labels, settings);
        std::vector<Matrix> predictions;
        for (auto& fc : forecasts) predictions.push_back(f.forecast_scale * fc.full);
        report = error_report_from(predictions, truth, labels);
        report.training_parameter_count = model.p();
        report.training_time_count = model.time_axis.count;
        report.regressor = settings.regressor;
    }

    std::ostringstream csv;
    csv << "label,time,e_I,regressor,n_excluded_zero_norm\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        csv << labels[j] << ',' << num(report.times[j]) << ',' << num(report.mean_error[j]) << ','
            << to_string(report.regressor) << ',' << report.excluded[j] << '\n';
    }
    write_text(f.out, csv.str());

    std::ostringstream per;
    per << "label,time,parameter_index";
    for (std::size_t d = 0; d < truth.parameter_dim(); ++d) per << ",mu_" << d;
    per << ",relative_error\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        for (std::size_t i = 0; i < report.parameters.size(); ++i) {
            per << labels[j] << ',' << num(report.times[j]) << ',' << i;
            for (double c : report.parameters[i].coords) per << ',' << num(c);
            per << ',' << num(report.relative_errors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                << '\n';
        }
    }
    fs::path breakdown = f.breakdown;
    if (breakdown.empty()) {
        breakdown = fs::path(f.out);
        breakdown.replace_filename(breakdown.stem().string() + "_per_parameter.csv");
    }
    write_text(breakdown, per.str());

    if (!g.quiet) {
        double worst = 0.0;
        for (double e : report.mean_error) worst = std::isnan(e) ? worst : std::max(worst, e);
        out << "validated " << labels.size() << " label(s) over " << truth.p() << " parameter(s); max e_I "
            << num(worst) << ", " << report.excluded_total << " zero-norm term(s) excluded\n";
    }
    return exit_ok;
}

// -------------------------------------------------------------- sensitivity

struct SensitivityFlags {
    std::string archive;
    std::string mode;
    std::string out;
    std::string variant = "partitioned";
    Eigen::Index pod_rank = 0;
    DmdFlags dmd;
    std::vector<std::string> regressors{"linear"};
    std::optional<double> lengthscale;
    std::optional<double> noise;
    std::int64_t probe = 0;
    std::string validation;
    std::string pool;
    std::int64_t time_count = -1;
    std::size_t initial = 2;
    std::size_t step = 1;
    std::size_t final_size = 0;
    bool random_only = false;
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;
    std::int64_t window_step = 1;
};

int cmd_sensitivity(const SensitivityFlags& f, const Globals& g, std::ostream& out) {
    const ParametricSnapshotSet full = read_archive(f.archive);
    SensitivitySetup setup;
    setup.variant = variant_from_string(f.variant);
    setup.dmd_config = f.dmd.config();
    if (f.pod_rank < 1) throw UsageError("--pod-rank must be >= 1");
    setup.pod_rank = f.pod_rank;
    setup.regressors.clear();
    for (const auto& r : f.regressors) setup.regressors.push_back(regressor_kind_from_string(r));
    setup.regressor_options = RegressorOptions{f.lengthscale, f.noise};
    setup.probe_label = f.probe;
    if (!full.time_axis.contains(f.probe)) throw UsageError("--probe label outside the archive's time window");
    setup.validation = parse_index_list(f.validation);
    check_indices(setup.validation, full.p(), "--validation");

    std::vector<std::size_t> pool;
    if (!f.pool.empty()) {
        pool = parse_index_list(f.pool);
        check_indices(pool, full.p(), "--pool");
    } else {
        const std::set<std::size_t> q(setup.validation.begin(), setup.validation.end());
        for (std::size_t i = 0; i < full.p(); ++i) {
            if (!q.count(i)) pool.push_back(i);
        }
    }
    for (std::size_t i : pool) {
        if (std::find(setup.validation.begin(), setup.validation.end(), i) != setup.validation.end()) {
            throw UsageError("member " + std::to_string(i) + " is in both --pool and --validation");
        }
    }

    SensitivityTable table;
    if (f.mode == "parameter") {
        const std::size_t final_size = f.final_size == 0 ? pool.size() : f.final_size;
        std::vector<std::size_t> required;
        if (!f.random_only) required = hull_members(full, pool);
        const std::size_t first = std::max(f.initial, required.size());
        if (final_size > pool.size() || f.initial < 1 || first > final_size) {
            throw UsageError("parameter schedule needs 1 <= --initial <= --final <= " + std::to_string(pool.size()) +
                             "; the first subset holds " + std::to_string(first) + " members");
        }
        if (f.step < 1) throw UsageError("--step must be >= 1");
        if (f.time_count == 0 || f.time_count > full.time_axis.count) {
            throw UsageError("--time-count must be in [1, " + std::to_string(full.time_axis.count) + "]");
        }
        const auto subsets = nested_random_subsets(pool, f.initial, f.step, final_size, g.seed, required);
        table = run_parameter_sensitivity(full, subsets, f.time_count, setup);
    } else {
        if (f.window_step < 1) throw UsageError("--window-step must be >= 1");
        const std::int64_t end = f.window_end == 0 ? full.time_axis.count : f.window_end;
        if (f.window_start < setup.dmd_config.hodmd_depth + 1 || end > full.time_axis.count ||
            f.window_start > end) {
            throw UsageError("time schedule needs depth + 1 <= --window-start <= --window-end <= " +
                             std::to_string(full.time_axis.count));
        }
        std::vector<std::int64_t> windows;
        for (std::int64_t c = f.window_start; c <= end; c += f.window_step) windows.push_back(c);
        table = run_time_sensitivity(full, pool, windows, setup);
    }
    table.seed = g.seed;

    std::ostringstream csv;
    csv << "# seed=" << table.seed << " mode=" << table.mode << " probe_label=" << table.probe_label
        << " variant=" << f.variant << " pod_rank=" << f.pod_rank << '\n';
    csv << "k,set_size,regressor,e_I\n";
    for (const auto& row : table.rows) {
        csv << row.step << ',' << row.size << ',' << to_string(row.regressor) << ',' << num(row.error) << '\n';
    }
    write_text(f.out, csv.str());
    if (!g.quiet) out << "wrote " << table.rows.size() << " rows to " << f.out << '\n';
    return exit_ok;
}

// --------------------------------------------------------------------- info

int cmd_info(const std::string& path, std::ostream& out) {
    if (looks_like_model(path)) {
        const ParametricDmdModel model = load_model(path);
        out << "model variant=" << to_string(model.variant) << " n=" << model.n() << " p=" << model.p()
            << " m=" << model.pod.m() << " N=" << model.time_axis.count << '\n';
        out << "time axis: t0=" << num(model.time_axis.t0) << " dt=" << num(model.time_axis.dt)
            << " labels " << model.time_axis.label_origin << ".." << model.time_axis.last_label() << '\n';
        out << "dmd: svd_rank=" << model.dmd_config.svd_rank << " hodmd_depth=" << model.dmd_config.hodmd_depth
            << " stabilization="
            << (model.dmd_config.stabilization ? num(*model.dmd_config.stabilization) : std::string("off"))
            << " amplitudes=" << to_string(model.dmd_config.amplitude_strategy) << '\n';
        out << "online regressor=" << to_string(model.online.regressor) << '\n';
        for (std::size_t i = 0; i < model.operators.size(); ++i) {
            out << "operator " << i << ": " << spectrum_summary(model.operators[i]) << '\n';
        }
        return exit_ok;
    }
    if (looks_like_archive(path)) {
        const ParametricSnapshotSet set = read_archive(path);
        print_set_summary(out, set);
        out << "field=" << set.field_name << " t0=" << num(set.time_axis.t0) << " dt=" << num(set.time_axis.dt)
            << " labels " << set.time_axis.label_origin << ".." << set.time_axis.last_label() << '\n';
        for (std::size_t i = 0; i < set.p(); ++i) out << "member " << i << ": mu=" << to_string(set.members[i].parameter) << '\n';
        return exit_ok;
    }
    throw UsageError(path + " is neither a snapshot archive nor a model directory");
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_argument:
        case ErrorCode::rank_out_of_bounds:
            return exit_usage;
        default:
            return exit_computation;
    }
}

}  // namespace

std::vector<std::int64_t> parse_label_list(const std::string& text) {
    std::vector<std::int64_t> out;
    auto parse_int = [&](const std::string& s) -> std::int64_t {
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw UsageError("bad label '" + s + "' in '" + text + "'");
        return v;
    };
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) throw UsageError("empty entry in label list '" + text + "'");
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_int(part));
            continue;
        }
        const std::int64_t a = parse_int(part.substr(0, dots));
        const std::int64_t b = parse_int(part.substr(dots + 2));
        if (b < a) throw UsageError("empty label range '" + part + "'");
        for (std::int64_t v = a; v <= b; ++v) out.push_back(v);
    }
    if (out.empty()) throw UsageError("label list is empty");
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parametric dynamic mode decomposition toolkit", "pdmd"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with default option values");
    Globals globals;
    app.add_option("--seed", globals.seed, "seed for every random choice");
    app.add_flag("--quiet", globals.quiet, "suppress summaries");

    GenerateFlags gen;
    auto* generate = app.add_subcommand("generate", "generate a benchmark snapshot archive");
    generate->add_option("problem", gen.problem, "toy, heat or synthetic")
        ->required()
        ->check(CLI::IsMember({"toy", "heat", "synthetic"}));
    generate->add_option("--out", gen.out, "archive directory")->required();
    generate->add_option("--dtype", gen.dtype, "auto, real64 or complex128")
        ->check(CLI::IsMember({"auto", "real64", "complex128"}));
    generate->add_option("--m", gen.m, "toy: spatial samples")->check(CLI::Range(2, 100000000));
    generate->add_option("--count", gen.count, "toy/synthetic: time samples")->check(CLI::Range(2, 100000000));
    generate->add_option("--label-count", gen.label_count,
                         "toy: labels to generate on the N-sample time grid (default N)")
        ->check(CLI::Range(2, 100000000));
    generate->add_option("--mu", gen.mu, "toy/synthetic: parameter values");
    generate->add_option("--params", gen.params, "heat: training parameters")->check(CLI::Range(1, 100000));
    generate->add_option("--held-out", gen.held_out, "heat: held-out parameters inside the training hull");
    generate->add_option("--held-out-out", gen.held_out_out, "heat: held-out archive (default <out>-heldout)");
    generate->add_option("--grid", gen.grid, "heat: interior nodes per axis")->check(CLI::Range(4, 4096));
    generate->add_option("--labels", gen.labels, "heat: number of labels")->check(CLI::Range(2, 1000000));
    generate->add_option("--substeps", gen.substeps, "heat: solver substeps per label")->check(CLI::Range(1, 100000));
    generate->add_option("--source-scale", gen.source_scale, "heat: forcing multiplier");
    generate->add_option("--state-dim", gen.state_dim, "synthetic: state dimension")->check(CLI::Range(2, 100000));
    generate->add_option("--rho", gen.rho, "synthetic: modulus of the divergent mode (>= 1)");
    generate->add_option("--fraction", gen.fraction, "synthetic: relative amplitude of the divergent mode");
    generate->add_option("--angles", gen.angles, "synthetic: stable mode frequencies (radians per step)");
    generate->add_option("--unstable-angle", gen.unstable_angle, "synthetic: divergent mode frequency");

    TrainFlags tr;
    auto* train = app.add_subcommand("train", "fit a parametric DMD model");
    train->add_option("archive", tr.archive, "snapshot archive")->required();
    train->add_option("--out", tr.out, "model directory")->required();
    train->add_option("--variant", tr.variant, "monolithic or partitioned")
        ->check(CLI::IsMember({"monolithic", "partitioned"}));
    train->add_option("--pod-rank", tr.pod_rank, "number of POD modes")->required();
    train->add_option("--time-count", tr.time_count, "train on the first N instants only");
    train->add_option("--members", tr.members, "member indices to train on, e.g. 0..19");
    tr.dmd.add_to(train);
    tr.regressor.add_to(train);

    PredictFlags pr;
    auto* predict = app.add_subcommand("predict", "forecast the full field at a parameter");
    predict->add_option("model", pr.model, "model directory")->required();
    predict->add_option("--mu", pr.mu, "parameter coordinates")->required();
    predict->add_option("--labels", pr.labels, "labels, e.g. 129..256")->required();
    predict->add_option("--out", pr.out, "output field archive");
    predict->add_option("--coefficients", pr.coefficients, "reduced-coefficient CSV (default <out>/coefficients.csv)");
    predict->add_option("--dtype", pr.dtype, "auto, real64 or complex128")
        ->check(CLI::IsMember({"auto", "real64", "complex128"}));
    pr.regressor.add_to(predict);

    ValidateFlags va;
    auto* validate = app.add_subcommand("validate", "mean relative error against a truth archive");
    validate->add_option("model", va.model, "model directory")->required();
    validate->add_option("truth", va.truth, "truth archive")->required();
    validate->add_option("--labels", va.labels, "labels, e.g. 86..100")->required();
    validate->add_option("--out", va.out, "error CSV")->required();
    validate->add_option("--breakdown", va.breakdown, "per-parameter CSV (default <out stem>_per_parameter.csv)");
    validate->add_option("--forecast-scale", va.forecast_scale)->group("");
    va.regressor.add_to(validate);

    SensitivityFlags se;
    auto* sensitivity = app.add_subcommand("sensitivity", "error versus training-set size");
    sensitivity->add_option("archive", se.archive, "snapshot archive")->required();
    sensitivity->add_option("--mode", se.mode, "parameter or time")
        ->required()
        ->check(CLI::IsMember({"parameter", "time"}));
    sensitivity->add_option("--out", se.out, "table CSV")->required();
    sensitivity->add_option("--variant", se.variant, "monolithic or partitioned")
        ->check(CLI::IsMember({"monolithic", "partitioned"}));
    sensitivity->add_option("--pod-rank", se.pod_rank, "number of POD modes")->required();
    se.dmd.add_to(sensitivity);
    sensitivity->add_option("--regressors", se.regressors, "regressor kinds to tabulate (space or comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"linear", "nearest", "cubic", "cubic-1d", "rbf", "gpr"}));
    sensitivity->add_option("--gpr-lengthscale", se.lengthscale)->check(CLI::PositiveNumber);
    sensitivity->add_option("--gpr-noise", se.noise)->check(CLI::NonNegativeNumber);
    sensitivity->add_option("--probe", se.probe, "label at which the error is measured")->required();
    sensitivity->add_option("--validation", se.validation, "held-out member indices")->required();
    sensitivity->add_option("--pool", se.pool, "training member indices (default: all others)");
    sensitivity->add_option("--time-count", se.time_count, "parameter mode: training instants");
    sensitivity->add_option("--initial", se.initial, "parameter mode: size of the first subset");
    sensitivity->add_option("--step", se.step, "parameter mode: members added per step");
    sensitivity->add_option("--final", se.final_size, "parameter mode: size of the last subset (default: pool)");
    sensitivity->add_flag("--random-only", se.random_only,
                          "parameter mode: do not seed the first subset with the pool's hull members");
    sensitivity->add_option("--window-start", se.window_start, "time mode: first window length");
    sensitivity->add_option("--window-end", se.window_end, "time mode: last window length (default: all)");
    sensitivity->add_option("--window-step", se.window_step, "time mode: instants added per step");

    std::string info_path;
    auto* info = app.add_subcommand("info", "describe an archive or model");
    info->add_option("path", info_path, "archive or model directory")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, globals, out);
        if (train->parsed()) return cmd_train(tr, globals, out);
        if (predict->parsed()) return cmd_predict(pr, globals, out);
        if (validate->parsed()) return cmd_validate(va, globals, out);
        if (sensitivity->parsed()) return cmd_sensitivity(se, globals, out);
        return cmd_info(info_path, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_computation;
    }
}

}  // namespace pdmd
