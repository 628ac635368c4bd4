#include "pdmd/model_io.hpp"

#include "pdmd/archive.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace pdmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json complex_list(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

Vector complex_vector(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto pair = j.at(i).get<std::vector<double>>();
        if (pair.size() != 2) throw Error(ErrorCode::format, "complex entries must be [re, im] pairs");
        v(static_cast<Eigen::Index>(i)) = Complex(pair[0], pair[1]);
    }
    return v;
}

std::string operator_file(std::size_t i, const char* what) {
    std::ostringstream name;
    name << "operator_" << std::setw(4) << std::setfill('0') << i << '_' << what << ".bin";
    return name.str();
}

json config_json(const DmdConfig& c) {
    json j;
    j["svd_rank"] = c.svd_rank;
    j["hodmd_depth"] = c.hodmd_depth;
    j["stabilization"] = c.stabilization ? json(*c.stabilization) : json(nullptr);
    j["amplitude_strategy"] = to_string(c.amplitude_strategy);
    return j;
}

DmdConfig config_from(const json& j) {
    DmdConfig c;
    c.svd_rank = j.at("svd_rank").get<Eigen::Index>();
    c.hodmd_depth = j.at("hodmd_depth").get<int>();
    if (!j.at("stabilization").is_null()) c.stabilization = j.at("stabilization").get<double>();
    c.amplitude_strategy = amplitude_strategy_from_string(j.at("amplitude_strategy").get<std::string>());
    return c;
}

json online_json(const OnlineSettings& o) {
    json j;
    j["regressor"] = to_string(o.regressor);
    j["gpr_lengthscale"] = o.options.gpr_lengthscale ? json(*o.options.gpr_lengthscale) : json(nullptr);
    j["gpr_noise"] = o.options.gpr_noise ? json(*o.options.gpr_noise) : json(nullptr);
    return j;
}

OnlineSettings online_from(const json& j) {
    OnlineSettings o;
    o.regressor = regressor_kind_from_string(j.at("regressor").get<std::string>());
    if (j.contains("gpr_lengthscale") && !j["gpr_lengthscale"].is_null()) {
        o.options.gpr_lengthscale = j["gpr_lengthscale"].get<double>();
    }
    if (j.contains("gpr_noise") && !j["gpr_noise"].is_null()) o.options.gpr_noise = j["gpr_noise"].get<double>();
    return o;
}

}  // namespace

void save_model(const ParametricDmdModel& model, const fs::path& destination) {
    std::error_code ec;
    fs::create_directories(destination, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + destination.string() + ": " + ec.message());

    json root;
    root["format_version"] = kModelFormatVersion;
    root["variant"] = to_string(model.variant);
    root["n"] = model.n();
    root["dmd_config"] = config_json(model.dmd_config);
    json params = json::array();
    for (const auto& p : model.parameters) params.push_back(p.coords);
    root["parameters"] = std::move(params);
    root["time_axis"] = {{"t0", model.time_axis.t0},
                         {"dt", model.time_axis.dt},
                         {"count", model.time_axis.count},
                         {"label_origin", model.time_axis.label_origin}};
    root["online_defaults"] = online_json(model.online);

    std::vector<double> sv(model.pod.singular_values.data(),
                           model.pod.singular_values.data() + model.pod.singular_values.size());
    root["pod"] = {{"n", model.pod.rank()}, {"singular_values", sv}, {"modes", "pod_modes.bin"}};
    write_matrix_file(destination / "pod_modes.bin", model.pod.modes);

    json ops = json::array();
    for (std::size_t i = 0; i < model.operators.size(); ++i) {
        const DmdModel& op = model.operators[i];
        json record = json::array();
        for (const auto& e : op.stabilization_record) {
            record.push_back({{"fitted_eigenvalue", {e.fitted_eigenvalue.real(), e.fitted_eigenvalue.imag()}},
                              {"disposition", to_string(e.disposition)}});
        }
        json j;
        j["d"] = op.depth;
        j["label_origin"] = op.label_origin;
        j["eigenvalues"] = complex_list(op.eigenvalues);
        j["amplitudes"] = complex_list(op.amplitudes);
        j["stabilization_record"] = std::move(record);
        j["amplitude_strategy"] = to_string(op.amplitude_strategy);
        j["svd_rank"] = op.svd_rank;
        j["residual"] = op.residual;
        j["residual_reference"] = op.residual_reference;
        j["warnings"] = op.warnings;
        j["modes"] = operator_file(i, "modes");
        j["training"] = operator_file(i, "training");
        write_matrix_file(destination / operator_file(i, "modes"), op.modes);
        write_matrix_file(destination / operator_file(i, "training"), op.training);
        ops.push_back(std::move(j));
    }
    root["operators"] = std::move(ops);

    std::ofstream out(destination / "model.json", std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write model.json in " + destination.string());
    out << root.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io, "failed writing model.json");
}

ParametricDmdModel load_model(const fs::path& source) {
    std::ifstream in(source / "model.json");
    if (!in) throw Error(ErrorCode::io, "no model.json in " + source.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("model.json is not valid JSON: ") + e.what());
    }

    ParametricDmdModel model;
    try {
        const int version = root.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorCode::unsupported_version, "model format version " + std::to_string(version) +
                                                            " (supported: " + std::to_string(kModelFormatVersion) + ")");
        }
        model.variant = variant_from_string(root.at("variant").get<std::string>());
        model.dmd_config = config_from(root.at("dmd_config"));
        for (const auto& p : root.at("parameters")) model.parameters.emplace_back(p.get<std::vector<double>>());
        const auto& ta = root.at("time_axis");
        model.time_axis = TimeAxis{ta.at("t0").get<double>(), ta.at("dt").get<double>(),
                                   ta.at("count").get<std::int64_t>(), ta.at("label_origin").get<std::int64_t>()};
        model.online = online_from(root.at("online_defaults"));

        const auto& pod = root.at("pod");
        const auto sv = pod.at("singular_values").get<std::vector<double>>();
        model.pod.singular_values = Eigen::Map<const RealVector>(sv.data(), static_cast<Eigen::Index>(sv.size()));
        model.pod.modes = read_matrix_file(source / pod.at("modes").get<std::string>());
        if (model.pod.rank() != pod.at("n").get<Eigen::Index>() || model.pod.rank() != root.at("n").get<Eigen::Index>()) {
            throw Error(ErrorCode::dimension_mismatch, "POD mode file does not hold n columns");
        }

        for (const auto& j : root.at("operators")) {
            DmdModel op;
            op.depth = j.at("d").get<int>();
            op.label_origin = j.at("label_origin").get<std::int64_t>();
            op.eigenvalues = complex_vector(j.at("eigenvalues"));
            op.amplitudes = complex_vector(j.at("amplitudes"));
            for (const auto& e : j.at("stabilization_record")) {
                const auto lam = e.at("fitted_eigenvalue").get<std::vector<double>>();
                if (lam.size() != 2) throw Error(ErrorCode::format, "fitted_eigenvalue must be [re, im]");
                op.stabilization_record.push_back(
                    {Complex(lam[0], lam[1]), disposition_from_string(e.at("disposition").get<std::string>())});
            }
            op.amplitude_strategy = amplitude_strategy_from_string(j.at("amplitude_strategy").get<std::string>());
            op.svd_rank = j.at("svd_rank").get<Eigen::Index>();
            op.residual = j.at("residual").get<double>();
            op.residual_reference = j.at("residual_reference").get<double>();
            op.warnings = j.value("warnings", std::vector<std::string>{});
            op.modes = read_matrix_file(source / j.at("modes").get<std::string>());
            op.training = read_matrix_file(source / j.at("training").get<std::string>());
            if (op.modes.cols() != op.eigenvalues.size() || op.amplitudes.size() != op.eigenvalues.size()) {
                throw Error(ErrorCode::dimension_mismatch, "operator modes, eigenvalues and amplitudes disagree");
            }
            model.operators.push_back(std::move(op));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("malformed model.json: ") + e.what());
    }

    const std::size_t expected_ops = model.variant == Variant::monolithic ? 1 : model.p();
    const Eigen::Index expected_dim =
        model.variant == Variant::monolithic ? model.n() * static_cast<Eigen::Index>(model.p()) : model.n();
    if (model.parameters.empty() || model.operators.size() != expected_ops) {
        throw Error(ErrorCode::format, "model.json lists " + std::to_string(model.operators.size()) +
                                           " operators for " + std::to_string(model.p()) + " parameters (" +
                                           to_string(model.variant) + ")");
    }
    for (const auto& op : model.operators) {
        if (op.state_dim() != expected_dim) {
            throw Error(ErrorCode::dimension_mismatch, "operator state dimension " + std::to_string(op.state_dim()) +
                                                           ", expected " + std::to_string(expected_dim));
        }
    }
    return model;
}

bool looks_like_model(const fs::path& path) { return fs::is_regular_file(path / "model.json"); }

bool looks_like_archive(const fs::path& path) { return fs::is_regular_file(path / "manifest.json"); }

}  // namespace pdmd
