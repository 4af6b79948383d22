#include "ghfm/serialize.hpp"

#include "ghfm/rng.hpp"

#include <cstdio>
#include <fstream>

namespace ghfm {

namespace {

Json vec_json(const VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

VectorXd vec_from(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Matrices are stored as a list of columns.
Json cols_json(const MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vec_json(m.col(c)));
    return out;
}

MatrixXd cols_from(const Json& j, Eigen::Index rows) {
    MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) {
        const VectorXd col = vec_from(j[c]);
        if (col.size() != rows) throw IngestError("json: matrix column has wrong length");
        m.col(static_cast<Eigen::Index>(c)) = col;
    }
    return m;
}

template <class T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw IngestError(std::string("json: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(std::string("json: bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Json to_json(const BasisSpec& basis) {
    return {{"t0", basis.t0}, {"t1", basis.t1}, {"degree", basis.degree}, {"spans", basis.spans}};
}

BasisSpec basis_from_json(const Json& j) {
    BasisSpec b{field<double>(j, "t0"), field<double>(j, "t1"), field<int>(j, "degree"), field<int>(j, "spans")};
    b.validate();
    return b;
}

Json to_json(const PenaltyConfig& c) {
    return {{"lambda", c.lambda},         {"phi", c.phi},          {"rho", c.rho},
            {"tol_primal", c.tol_primal}, {"tol_dual", c.tol_dual}, {"max_iters", c.max_iters},
            {"ridge", c.ridge},           {"adaptive_rho", c.adaptive_rho}, {"refit", c.refit},
            {"max_direct_units", c.max_direct_units}};
}

PenaltyConfig penalty_from_json(const Json& j) {
    PenaltyConfig c;
    c.lambda = field<double>(j, "lambda");
    c.phi = field<double>(j, "phi");
    c.rho = j.value("rho", c.rho);
    c.tol_primal = j.value("tol_primal", c.tol_primal);
    c.tol_dual = j.value("tol_dual", c.tol_dual);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.ridge = j.value("ridge", c.ridge);
    c.adaptive_rho = j.value("adaptive_rho", c.adaptive_rho);
    c.refit = j.value("refit", c.refit);
    c.max_direct_units = j.value("max_direct_units", c.max_direct_units);
    c.validate();
    return c;
}

Json to_json(const FitResult& fit) {
    Json parts = Json::array();
    for (std::size_t j = 0; j < fit.partitions.size(); ++j) {
        parts.push_back({{"count", fit.partitions[j].count},
                         {"subgroup_of_unit", fit.partitions[j].subgroup_of_unit},
                         {"coefficients", j < fit.subgroup_coefs.size() ? cols_json(fit.subgroup_coefs[j]) : Json::array()}});
    }
    const FitDiagnostics& d = fit.diagnostics;
    return {{"method", fit.method},
            {"family", to_string(fit.family)},
            {"basis", to_json(fit.basis)},
            {"p", fit.coefs.p},
            {"alpha", fit.coefs.alpha},
            {"offsets", vec_json(fit.coefs.offsets)},
            {"unit_coefficients", cols_json(fit.coefs.coefs)},
            {"partitions", parts},
            {"subject_ids", fit.subject_ids},
            {"unit_of_subject", fit.unit_of_subject},
            {"config", to_json(fit.config)},
            {"diagnostics",
             {{"iterations", d.iterations},
              {"converged", d.converged},
              {"primal_residual", d.primal_residual},
              {"dual_residual", d.dual_residual},
              {"final_rho", d.final_rho},
              {"objective_at_zero", d.objective_at_zero},
              {"objective_at_solution", d.objective_at_solution},
              {"objective_sane", d.objective_sane}}}};
}

FitResult fit_from_json(const Json& j) {
    FitResult fit;
    fit.method = field<std::string>(j, "method");
    fit.family = parse_family(field<std::string>(j, "family"));
    fit.basis = basis_from_json(field<Json>(j, "basis"));
    const int p = field<int>(j, "p");
    const int L = fit.basis.dimension();
    fit.coefs = {field<double>(j, "alpha"), cols_from(field<Json>(j, "unit_coefficients"), p * L), p, L,
                 vec_from(field<Json>(j, "offsets"))};
    for (const Json& part : field<Json>(j, "partitions")) {
        Partition pt;
        pt.count = field<int>(part, "count");
        pt.subgroup_of_unit = field<std::vector<int>>(part, "subgroup_of_unit");
        fit.partitions.push_back(std::move(pt));
        fit.subgroup_coefs.push_back(cols_from(field<Json>(part, "coefficients"), L));
    }
    fit.subject_ids = field<std::vector<std::string>>(j, "subject_ids");
    fit.unit_of_subject = field<std::vector<int>>(j, "unit_of_subject");
    fit.config = penalty_from_json(field<Json>(j, "config"));
    if (j.contains("diagnostics")) {
        const Json& d = j["diagnostics"];
        fit.diagnostics.iterations = d.value("iterations", 0);
        fit.diagnostics.converged = d.value("converged", false);
        fit.diagnostics.primal_residual = d.value("primal_residual", 0.0);
        fit.diagnostics.dual_residual = d.value("dual_residual", 0.0);
        fit.diagnostics.final_rho = d.value("final_rho", 0.0);
        fit.diagnostics.objective_at_zero = d.value("objective_at_zero", 0.0);
        fit.diagnostics.objective_at_solution = d.value("objective_at_solution", 0.0);
        fit.diagnostics.objective_sane = d.value("objective_sane", true);
    }
    if (fit.subject_ids.size() != fit.unit_of_subject.size())
        throw IngestError("json: subject_ids and unit_of_subject differ in length");
    for (int u : fit.unit_of_subject)
        if (u < 0 || u >= fit.coefs.units()) throw IngestError("json: unit index out of range");
    if (fit.coefs.offsets.size() != 0 && fit.coefs.offsets.size() != fit.coefs.units())
        throw IngestError("json: offsets length does not match the unit count");
    return fit;
}

Json to_json(const LinearGridFit& fit) {
    return {{"method", "lm"},
            {"family", to_string(fit.family)},
            {"m", fit.m},
            {"p", fit.p},
            {"alpha", fit.alpha},
            {"coefficients", vec_json(fit.coefs)},
            {"jitter", fit.jitter},
            {"iterations", fit.iterations},
            {"converged", fit.converged},
            {"subject_ids", fit.subject_ids}};
}

LinearGridFit lm_from_json(const Json& j) {
    LinearGridFit fit;
    fit.family = parse_family(field<std::string>(j, "family"));
    fit.m = field<int>(j, "m");
    fit.p = field<int>(j, "p");
    fit.alpha = field<double>(j, "alpha");
    fit.coefs = vec_from(field<Json>(j, "coefficients"));
    fit.jitter = j.value("jitter", 0.0);
    fit.iterations = j.value("iterations", 0);
    fit.converged = j.value("converged", true);
    fit.subject_ids = j.value("subject_ids", std::vector<std::string>{});
    if (fit.coefs.size() != fit.m * fit.p) throw IngestError("json: lm coefficient length mismatch");
    return fit;
}

Json to_json(const PreclusterResult& r) {
    return {{"K", r.K},
            {"phi", r.phi},
            {"seed", r.seed},
            {"restart", r.restart},
            {"iterations", r.iterations},
            {"objective", r.objective},
            {"assignment", r.assignment},
            {"sse_trajectory", r.sse_trajectory},
            {"objective_trajectory", r.objective_trajectory}};
}

Json to_json(const SyntheticTruth& t) {
    Json j = {{"setting", t.setting},
              {"groups", t.groups},
              {"seed", t.seed},
              {"alpha", t.alpha},
              {"sigma_prime", t.sigma_prime},
              {"noise_sd", t.noise_sd},
              {"n", t.n()},
              {"x_basis", to_json(t.x_basis)},
              {"subject_ids", t.subject_ids},
              {"labels", t.labels}};
    if (t.kind == TruthKind::spline) {
        j["beta"] = {{"kind", "spline"}, {"basis", to_json(t.beta_basis)}, {"coefficients", cols_json(t.beta_coefs)}};
    } else {
        j["beta"] = {{"kind", "closed_form"}, {"functions", t.functions}};
    }
    const SimulationOptions& o = t.options;
    j["options"] = {{"setting", o.setting}, {"n", o.n},           {"sigma_prime", o.sigma_prime},
                    {"seed", o.seed},       {"noise_sd", o.noise_sd}, {"alpha", o.alpha},
                    {"x_dim", o.x_dim},     {"x_degree", o.x_degree}, {"beta_dim", o.beta_dim},
                    {"beta_degree", o.beta_degree}, {"m", o.m},   {"t_end", o.t_end}};
    return j;
}

SyntheticTruth truth_from_json(const Json& j) {
    SyntheticTruth t;
    t.setting = field<int>(j, "setting");
    t.groups = field<int>(j, "groups");
    t.seed = field<std::uint64_t>(j, "seed");
    t.alpha = field<double>(j, "alpha");
    t.sigma_prime = field<double>(j, "sigma_prime");
    t.noise_sd = field<double>(j, "noise_sd");
    t.x_basis = basis_from_json(field<Json>(j, "x_basis"));
    t.subject_ids = field<std::vector<std::string>>(j, "subject_ids");
    t.labels = field<std::vector<int>>(j, "labels");
    const Json beta = field<Json>(j, "beta");
    if (field<std::string>(beta, "kind") == "spline") {
        t.kind = TruthKind::spline;
        t.beta_basis = basis_from_json(field<Json>(beta, "basis"));
        t.beta_coefs = cols_from(field<Json>(beta, "coefficients"), t.beta_basis.dimension());
    } else {
        t.kind = TruthKind::closed_form;
        t.functions = field<std::vector<std::string>>(beta, "functions");
    }
    const Json o = field<Json>(j, "options");
    SimulationOptions& so = t.options;
    so.setting = field<int>(o, "setting");
    so.n = field<int>(o, "n");
    so.sigma_prime = field<double>(o, "sigma_prime");
    so.seed = field<std::uint64_t>(o, "seed");
    so.noise_sd = field<double>(o, "noise_sd");
    so.alpha = field<double>(o, "alpha");
    so.x_dim = field<int>(o, "x_dim");
    so.x_degree = field<int>(o, "x_degree");
    so.beta_dim = field<int>(o, "beta_dim");
    so.beta_degree = field<int>(o, "beta_degree");
    so.m = field<int>(o, "m");
    so.t_end = field<double>(o, "t_end");
    if (t.subject_ids.size() != t.labels.size()) throw IngestError("json: truth ids and labels differ in length");
    return t;
}

Json to_json(const TuneResult& r) {
    Json cells = Json::array();
    for (const TuneCell& c : r.cells)
        cells.push_back({{"lambda", c.lambda},
                         {"phi", c.phi},
                         {"score", c.score},
                         {"df", c.df},
                         {"subgroups", c.subgroups},
                         {"iterations", c.iterations},
                         {"converged", c.converged}});
    return {{"best", to_json(r.best)}, {"best_index", r.best_index}, {"cells", cells}};
}

Json model_to_json(const Model& model) {
    return std::visit([](const auto& m) { return to_json(m); }, model);
}

Model model_from_json(const Json& j) {
    if (field<std::string>(j, "method") == "lm") return lm_from_json(j);
    return fit_from_json(j);
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("'" + path + "': invalid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

std::string content_hash(const Json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
    return buf;
}

}  // namespace ghfm
