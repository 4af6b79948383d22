#include "ghfm/cli.hpp"

#include "ghfm/baselines.hpp"
#include "ghfm/experiment.hpp"
#include "ghfm/metrics.hpp"
#include "ghfm/parallel.hpp"
#include "ghfm/precluster.hpp"
#include "ghfm/rng.hpp"
#include "ghfm/serialize.hpp"
#include "ghfm/simgen.hpp"
#include "ghfm/tuner.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace ghfm {

namespace {

struct Common {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
};

void add_common(CLI::App* cmd, Common& common, bool out_required) {
    cmd->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", common.threads, "Worker threads (0 = all cores)")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    auto* out = cmd->add_option("--out", common.out, "Output path");
    if (out_required) out->required();
}

struct DataArgs {
    std::string path;
    std::string family;
    bool force_family = false;
    int p = 1;
    int m = 24;
    double t_end = 23.0;
};

void add_data(CLI::App* cmd, DataArgs& data, const std::string& flag = "--data") {
    cmd->add_option(flag, data.path, "Input CSV (subject_id, y, cov<j>_t<k> columns)")->required();
    cmd->add_option("--family", data.family, "gaussian or bernoulli (default: inferred from y)")
        ->check(CLI::IsMember({"gaussian", "bernoulli"}));
    cmd->add_flag("--force-family", data.force_family, "Accept --family gaussian on a 0/1 outcome");
    cmd->add_option("--p", data.p, "Number of functional covariates")->capture_default_str();
    cmd->add_option("--m", data.m, "Grid points per covariate")->capture_default_str();
    cmd->add_option("--t-end", data.t_end, "End of the time interval")->capture_default_str();
}

// Reads once as Gaussian (accepts any numeric y) and resolves the family.
FunctionalDataset load_data(const DataArgs& args) {
    CsvSchema schema{args.p, args.m, args.t_end, Family::gaussian};
    FunctionalDataset data = ingest_csv(args.path, schema);
    bool binary = data.n() > 0;
    for (Eigen::Index i = 0; i < data.y.size(); ++i) binary = binary && (data.y[i] == 0.0 || data.y[i] == 1.0);
    Family family = binary ? Family::bernoulli : Family::gaussian;
    if (!args.family.empty()) {
        const Family requested = parse_family(args.family);
        if (requested == Family::bernoulli && !binary)
            throw IngestError("family conflict: --family bernoulli but '" + args.path +
                              "' has outcomes outside {0, 1}");
        if (requested == Family::gaussian && binary && !args.force_family)
            throw ArgumentError("family conflict: --family gaussian but every outcome in '" + args.path +
                                "' is 0/1 (bernoulli data); pass --family bernoulli or --force-family");
        family = requested;
    }
    data.family = family;
    return data;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash_string(buf.str())));
    return hex;
}

// Sidecar describing how an artifact was produced.
void write_manifest(const CLI::App& cmd, const Common& common, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    if (common.out.empty()) return;
    Json args = Json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        const auto results = opt->results();
        args[opt->get_name()] = results.size() == 1 ? Json(results.front()) : Json(results);
    }
    // Output destinations and the thread count do not change results.
    Json config = Json::object();
    for (const auto& [name, value] : args.items()) {
        const bool destination = name == "--out" || name.ends_with("-out");
        if (!destination && name != "--threads") config[name] = value;
    }
    Json in = Json::object();
    for (const std::string& path : inputs)
        if (!path.empty()) in[path] = file_hash(path);
    Json out = Json::object();
    for (const std::string& path : outputs)
        if (!path.empty()) out[path] = file_hash(path);
    Json manifest = {{"tool", "ghfm"},
                     {"version", kVersion},
                     {"command", cmd.get_name()},
                     {"arguments", args},
                     {"seed", common.seed},
                     {"threads", common.threads},
                     {"config_hash", content_hash(config)},
                     {"inputs", in},
                     {"outputs", out},
                     {"build",
                      {{"compiler", __VERSION__},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)}}}};
    write_json(common.out + ".manifest.json", manifest);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ArgumentError("cannot parse '" + item + "' as a number");
        out.push_back(v);
    }
    if (out.empty()) throw ArgumentError("empty numeric list");
    return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    Common common;
    SimulationOptions sim;
    std::string truth_out, test_out;
    int test_draw = 1;
};

void run_simulate(const CLI::App& cmd, SimulateArgs& a) {
    a.sim.seed = a.common.seed;
    const SimulatedData train = generate(a.sim);
    write_csv(a.common.out, train.data);
    std::vector<std::string> outputs{a.common.out};
    if (!a.truth_out.empty()) {
        write_json(a.truth_out, to_json(train.truth));
        outputs.push_back(a.truth_out);
    }
    if (!a.test_out.empty()) {
        write_csv(a.test_out, redraw(train.truth, a.test_draw).data);
        outputs.push_back(a.test_out);
    }
    write_manifest(cmd, a.common, {}, outputs);
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    Common common;
    DataArgs data;
    std::string method = "ghfm";
    double lambda = 0.0;
    double phi = 0.0;
    int basis_dim = 35;
    int degree = 3;
    int preclusters = 0;
    int restarts = 5;
    int precluster_iters = 100;
    double precluster_phi = 100.0;
    int groups = 0;
    double rho = 1.0;
    double tol = 1e-5;
    int max_iters = 2000;
    double ridge = 1e-8;
    bool no_refit = false;
    bool fixed_rho = false;
    bool center = false;
    std::string gamma_cache;
    std::string precluster_out;
};

void add_basis(CLI::App* cmd, int& dim, int& degree, bool& center, std::string& gamma_cache) {
    cmd->add_option("--basis-dim", dim, "Number of B-spline basis functions L")->capture_default_str();
    cmd->add_option("--degree", degree, "B-spline degree")->capture_default_str();
    cmd->add_flag("--center", center, "Center each covariate at its mean curve");
    cmd->add_option("--gamma-cache", gamma_cache, "Binary sidecar caching the design integrals");
}

DesignCache design_for(const FunctionalDataset& data, int dim, int degree, bool center, const std::string& sidecar) {
    const BasisSpec basis = BasisSpec::with_dimension(0.0, data.t_end, dim, degree);
    if (sidecar.empty()) return compute_gamma(data, basis, {center});
    return cached_gamma(data, basis, {center}, sidecar);
}

PenaltyConfig penalty_of(const FitArgs& a) {
    PenaltyConfig c;
    c.lambda = a.lambda;
    c.phi = a.phi;
    c.rho = a.rho;
    c.tol_primal = a.tol;
    c.tol_dual = a.tol;
    c.max_iters = a.max_iters;
    c.ridge = a.ridge;
    c.refit = !a.no_refit;
    c.adaptive_rho = !a.fixed_rho;
    return c;
}

UnitMap units_for(const FunctionalDataset& data, const DesignCache& cache, int K, int restarts, int iters,
                  double phi, std::uint64_t seed, std::optional<PreclusterResult>* keep) {
    if (K <= 0) return UnitMap::identity(data.n());
    PreclusterOptions options;
    options.seed = seed;
    options.restarts = restarts;
    options.max_iters = iters;
    PreclusterResult pc = precluster(data, cache, K, phi, options);
    UnitMap units = pc.units();
    if (keep) *keep = std::move(pc);
    return units;
}

void run_fit(const CLI::App& cmd, FitArgs& a, std::ostream& out) {
    const FunctionalDataset data = load_data(a.data);
    if (a.method == "lm") {
        write_json(a.common.out, to_json(fit_lm_glm(data)));
        write_manifest(cmd, a.common, {a.data.path}, {a.common.out});
        return;
    }
    const DesignCache cache = design_for(data, a.basis_dim, a.degree, a.center, a.gamma_cache);
    FitResult fit;
    std::optional<PreclusterResult> pc;
    if (a.method == "sflm") {
        fit = fit_sflm(data, cache, a.phi, a.ridge);
    } else if (a.method == "resp") {
        if (a.groups < 1) throw ArgumentError("fit --method resp requires --groups G");
        fit = fit_resp(data, cache, a.phi, a.groups, a.ridge);
    } else {
        const double pc_phi = a.precluster_phi;
        const UnitMap units =
            units_for(data, cache, a.preclusters, a.restarts, a.precluster_iters, pc_phi, a.common.seed, &pc);
        fit = fit_fused(data, cache, units, penalty_of(a));
        fit.state.reset();
        if (!fit.diagnostics.converged)
            std::cerr << "warning: splitting stopped at max_iters=" << a.max_iters << " before reaching tolerance\n";
    }
    write_json(a.common.out, to_json(fit));
    std::vector<std::string> outputs{a.common.out};
    if (pc && !a.precluster_out.empty()) {
        write_json(a.precluster_out, to_json(*pc));
        outputs.push_back(a.precluster_out);
    }
    write_manifest(cmd, a.common, {a.data.path}, outputs);
    out << "method=" << fit.method << " subgroups=";
    for (std::size_t j = 0; j < fit.partitions.size(); ++j) out << (j ? "," : "") << fit.partitions[j].count;
    out << " iterations=" << fit.diagnostics.iterations << '\n';
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
    Common common;
    DataArgs data;
    std::string model;
};

void write_predictions(const std::string& path, const FunctionalDataset& data, const Prediction& pred) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path + "'");
    const bool binary = !pred.labels.empty();
    out << "subject_id,y,eta,response" << (binary ? ",label" : "") << '\n';
    for (int i = 0; i < data.n(); ++i) {
        out << data.subject_ids[i] << ',' << format_double(data.y[i]) << ',' << format_double(pred.eta[i]) << ','
            << format_double(pred.response[i]);
        if (binary) out << ',' << pred.labels[i];
        out << '\n';
    }
}

void run_predict(const CLI::App& cmd, PredictArgs& a) {
    const Model model = model_from_json(read_json(a.model));
    Prediction pred;
    FunctionalDataset data;
    if (const auto* lm = std::get_if<LinearGridFit>(&model)) {
        if (a.data.family.empty()) a.data.family = to_string(lm->family);
        data = load_data(a.data);
        pred = predict_lm(*lm, data);
    } else {
        const FitResult& fit = std::get<FitResult>(model);
        if (a.data.family.empty()) a.data.family = to_string(fit.family);
        a.data.force_family = true;
        data = load_data(a.data);
        pred = predict(fit, data, compute_gamma(data, fit.basis));
    }
    write_predictions(a.common.out, data, pred);
    write_manifest(cmd, a.common, {a.model, a.data.path}, {a.common.out});
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    Common common;
    std::vector<std::string> preds;
    std::string truth;
    std::string model;
    std::string csv_row;
    double threshold = 0.5;
};

struct PredFile {
    std::vector<std::string> ids;
    VectorXd y, response;
};

PredFile read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IngestError("'" + path + "': empty prediction file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto col = [&](const std::string& name) {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw IngestError("'" + path + "': missing column '" + name + "'");
    };
    const std::size_t cid = col("subject_id"), cy = col("y"), cr = col("response");
    PredFile f;
    std::vector<double> y, r;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw IngestError("'" + path + "' row " + std::to_string(row) + ": wrong number of cells");
        f.ids.push_back(cells[cid]);
        try {
            y.push_back(std::stod(cells[cy]));
            r.push_back(std::stod(cells[cr]));
        } catch (const std::exception&) {
            throw IngestError("'" + path + "' row " + std::to_string(row) + ": malformed number");
        }
    }
    f.y = Eigen::Map<VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    f.response = Eigen::Map<VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    return f;
}

Json json_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void run_evaluate(const CLI::App& cmd, EvaluateArgs& a) {
    std::vector<PredFile> days;
    for (const std::string& p : a.preds) days.push_back(read_predictions(p));
    bool binary = true;
    for (const PredFile& d : days)
        for (Eigen::Index i = 0; i < d.y.size(); ++i) binary = binary && (d.y[i] == 0.0 || d.y[i] == 1.0);
    std::vector<VectorXd> ys, rs;
    for (const PredFile& d : days) {
        ys.push_back(d.y);
        rs.push_back(d.response);
    }

    Json metrics = Json::object();
    metrics["days"] = days.size();
    metrics["n"] = days.front().y.size();
    if (binary) {
        double mean_omr = 0.0;
        for (std::size_t d = 0; d < days.size(); ++d) mean_omr += omr(ys[d], rs[d], a.threshold);
        metrics["omr"] = mean_omr / static_cast<double>(days.size());
        const RocSummary roc = multiday_roc(ys, rs, a.threshold);
        metrics["fnr"] = json_number(roc.fnr);
        metrics["fpr"] = json_number(roc.fpr);
        metrics["auc"] = json_number(roc.auc);
    } else {
        double mean_rpmse = 0.0;
        for (std::size_t d = 0; d < days.size(); ++d) mean_rpmse += rpmse(ys[d], rs[d]);
        metrics["rpmse"] = mean_rpmse / static_cast<double>(days.size());
        metrics["multiday_rmse"] = multiday_rpmse(ys, rs, MultidayRmse::mean_of_roots);
        metrics["multiday_rmse_root_of_mean"] = multiday_rpmse(ys, rs, MultidayRmse::root_of_mean);
    }

    if (!a.truth.empty() && !a.model.empty()) {
        const SyntheticTruth truth = truth_from_json(read_json(a.truth));
        const Model model = model_from_json(read_json(a.model));
        const auto* fit = std::get_if<FitResult>(&model);
        if (!fit) throw ArgumentError("evaluate: the lm model has no coefficient functions for ise/smr");
        std::map<std::string, int> row_of;
        for (std::size_t i = 0; i < fit->subject_ids.size(); ++i) row_of[fit->subject_ids[i]] = static_cast<int>(i);
        SplineCurves est{fit->basis, MatrixXd(fit->basis.dimension(), truth.n())};
        std::vector<int> labels_hat(truth.n());
        const std::vector<int> subgroup = fit->subject_subgroups(0);
        for (int i = 0; i < truth.n(); ++i) {
            auto it = row_of.find(truth.subject_ids[i]);
            if (it == row_of.end())
                throw MappingError("evaluate: truth subject '" + truth.subject_ids[i] + "' is absent from the model");
            est.coefs.col(i) = fit->coefs.block(fit->unit_of_subject[it->second], 0);
            labels_hat[i] = subgroup[it->second];
        }
        metrics["ise"] = truth.kind == TruthKind::spline
                             ? ise(est, SplineCurves{truth.beta_basis, truth.beta_coefs})
                             : ise(est, [&](int i, double t) { return truth.beta(i, t); });
        metrics["smr"] = smr(labels_hat, truth.labels);
        metrics["subgroups"] = fit->partitions.front().count;
    }
    write_json(a.common.out, metrics);
    std::vector<std::string> outputs{a.common.out};
    if (!a.csv_row.empty()) {
        std::ofstream row(a.csv_row);
        std::string header, values;
        for (auto it = metrics.begin(); it != metrics.end(); ++it) {
            header += (header.empty() ? "" : ",") + it.key();
            values += (values.empty() ? "" : ",") +
                      (it.value().is_number_float() ? format_double(it.value().get<double>()) : it.value().dump());
        }
        row << header << '\n' << values << '\n';
        outputs.push_back(a.csv_row);
    }
    std::vector<std::string> inputs = a.preds;
    inputs.push_back(a.truth);
    inputs.push_back(a.model);
    write_manifest(cmd, a.common, inputs, outputs);
}

// -------------------------------------------------------------------- tune

struct TuneArgs {
    FitArgs fit;
    std::string lambda_grid, phi_grid;
    std::string grid = "default";
    std::string criterion = "bic";
    std::string holdout_file;
    double bic_c = 1.0;
    std::string cells_out;
};

void run_tune(const CLI::App& cmd, TuneArgs& a, std::ostream& out) {
    FitArgs& f = a.fit;
    const FunctionalDataset data = load_data(f.data);
    const DesignCache cache = design_for(data, f.basis_dim, f.degree, f.center, f.gamma_cache);
    const double pc_phi = f.precluster_phi;
    std::optional<PreclusterResult> pc;
    const UnitMap units = units_for(data, cache, f.preclusters, f.restarts, f.precluster_iters, pc_phi, f.common.seed, &pc);
    TuneGrid grid = a.grid == "scaled" ? TuneGrid::scaled(data.y, units.units) : TuneGrid::defaults(data.n());
    if (!a.lambda_grid.empty()) grid.lambdas = parse_list(a.lambda_grid);
    if (!a.phi_grid.empty()) grid.phis = parse_list(a.phi_grid);

    TuneOptions options;
    options.criterion = parse_criterion(a.criterion);
    options.bic_constant = a.bic_c;
    options.base = penalty_of(f);
    FunctionalDataset holdout;
    DesignCache holdout_cache;
    if (options.criterion == Criterion::holdout) {
        if (a.holdout_file.empty()) throw ArgumentError("tune --criterion holdout requires --holdout-file");
        DataArgs h = f.data;
        h.path = a.holdout_file;
        h.family = to_string(data.family);
        h.force_family = true;
        holdout = load_data(h);
        holdout_cache = compute_gamma_like(holdout, cache);
        options.holdout = {&holdout, &holdout_cache};
    }
    TuneResult result = tune(data, cache, units, grid, options);
    result.fit.state.reset();
    write_json(f.common.out, to_json(result.fit));
    std::vector<std::string> outputs{f.common.out};
    if (!a.cells_out.empty()) {
        std::ofstream cells(a.cells_out);
        cells << "lambda,phi,score,df,subgroups,iterations,converged\n";
        for (const TuneCell& c : result.cells)
            cells << format_double(c.lambda) << ',' << format_double(c.phi) << ',' << format_double(c.score) << ','
                  << format_double(c.df) << ',' << (c.subgroups.empty() ? 0 : c.subgroups.front()) << ','
                  << c.iterations << ',' << (c.converged ? 1 : 0) << '\n';
        outputs.push_back(a.cells_out);
    }
    if (pc && !f.precluster_out.empty()) {
        write_json(f.precluster_out, to_json(*pc));
        outputs.push_back(f.precluster_out);
    }
    write_manifest(cmd, f.common, {f.data.path, a.holdout_file}, outputs);
    out << "lambda=" << format_double(result.best.lambda) << " phi=" << format_double(result.best.phi)
        << " subgroups=" << result.fit.partitions.front().count << '\n';
}

// ----------------------------------------------------------- export-curves

struct ExportArgs {
    Common common;
    std::string model;
    int points = 241;
};

void run_export(const CLI::App& cmd, ExportArgs& a) {
    if (a.points < 2) throw ArgumentError("export-curves: --points must be >= 2");
    const Model model = model_from_json(read_json(a.model));
    const auto* fit = std::get_if<FitResult>(&model);
    if (!fit) throw ArgumentError("export-curves: the lm model has no coefficient functions");
    std::ofstream out(a.common.out);
    if (!out) throw IngestError("cannot write '" + a.common.out + "'");
    out << "covariate,subgroup,t,value\n";
    const BasisSpec& basis = fit->basis;
    VectorXd t(a.points);
    for (int k = 0; k < a.points; ++k) t[k] = basis.t0 + (basis.t1 - basis.t0) * k / (a.points - 1);
    t[a.points - 1] = basis.t1;
    const MatrixXd values = basis_matrix(basis, t);
    for (std::size_t j = 0; j < fit->subgroup_coefs.size(); ++j) {
        const MatrixXd curves = values * fit->subgroup_coefs[j];
        for (Eigen::Index s = 0; s < curves.cols(); ++s)
            for (int k = 0; k < a.points; ++k)
                out << j + 1 << ',' << s + 1 << ',' << format_double(t[k]) << ',' << format_double(curves(k, s)) << '\n';
    }
    out.close();
    write_manifest(cmd, a.common, {a.model}, {a.common.out});
}

// --------------------------------------------------------------- reproduce

struct ReproduceArgs {
    Common common;
    int table = 1;
    int n = 100;
    int seeds = 5;
    int preclusters = -1;
    std::string lambda_grid, phi_grid;
    std::string replicates_out;
};

void run_reproduce(const CLI::App& cmd, ReproduceArgs& a) {
    ReproduceOptions options;
    options.table = a.table;
    options.n = a.n;
    options.seeds = a.seeds;
    options.seed = a.common.seed;
    options.pipeline.preclusters = a.preclusters;
    if (!a.lambda_grid.empty() != !a.phi_grid.empty())
        throw ArgumentError("reproduce: pass both --lambda-grid and --phi-grid, or neither");
    if (!a.lambda_grid.empty()) options.pipeline.grid = TuneGrid{parse_list(a.lambda_grid), parse_list(a.phi_grid)};
    std::ofstream replicates;
    if (!a.replicates_out.empty()) {
        replicates.open(a.replicates_out);
        options.replicates = &replicates;
    }
    std::ofstream out(a.common.out);
    if (!out) throw IngestError("cannot write '" + a.common.out + "'");
    reproduce_table(options, out);
    out.close();
    replicates.close();
    write_manifest(cmd, a.common, {}, {a.common.out, a.replicates_out});
}

void report(std::ostream& err, const char* kind, const std::string& message) {
    err << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heterogeneous functional regression with subgroup fusion"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
    add_common(simulate, sim.common, true);
    simulate->add_option("--setting", sim.sim.setting, "Simulation setting")->required()->check(CLI::Range(1, 3));
    simulate->add_option("--n", sim.sim.n, "Number of subjects")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--sigma-prime", sim.sim.sigma_prime, "Coefficient noise sd")->capture_default_str();
    simulate->add_option("--noise-sd", sim.sim.noise_sd, "Response noise sd")->capture_default_str();
    simulate->add_option("--alpha", sim.sim.alpha, "True intercept")->capture_default_str();
    simulate->add_option("--x-dim", sim.sim.x_dim, "Covariate basis dimension")->capture_default_str();
    simulate->add_option("--x-degree", sim.sim.x_degree, "Covariate basis degree")->capture_default_str();
    simulate->add_option("--beta-dim", sim.sim.beta_dim, "Coefficient basis dimension")->capture_default_str();
    simulate->add_option("--beta-degree", sim.sim.beta_degree, "Coefficient basis degree")->capture_default_str();
    simulate->add_option("--truth-out", sim.truth_out, "Ground truth JSON");
    simulate->add_option("--test-out", sim.test_out, "Held-out replicate for the same subjects (CSV)");
    simulate->add_option("--test-draw", sim.test_draw, "Replicate index of the held-out draw")->capture_default_str()
        ->check(CLI::PositiveNumber);

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Fit a model");
    auto add_fit_options = [](CLI::App* cmd, FitArgs& f) {
        add_common(cmd, f.common, true);
        add_data(cmd, f.data);
        add_basis(cmd, f.basis_dim, f.degree, f.center, f.gamma_cache);
        cmd->add_option("--preclusters", f.preclusters, "Pre-clustering groups K (0 = fit subjects directly)")
            ->capture_default_str();
        cmd->add_option("--restarts", f.restarts, "Pre-clustering restarts")->capture_default_str();
        cmd->add_option("--precluster-iters", f.precluster_iters, "Pre-clustering iteration cap")->capture_default_str();
        cmd->add_option("--precluster-phi", f.precluster_phi, "Roughness weight used while pre-clustering")
            ->capture_default_str();
        cmd->add_option("--precluster-out", f.precluster_out, "Pre-clustering result JSON");
        cmd->add_option("--rho", f.rho, "Initial splitting penalty")->capture_default_str();
        cmd->add_option("--tol", f.tol, "Primal and dual tolerance")->capture_default_str();
        cmd->add_option("--max-iters", f.max_iters, "Splitting iteration cap")->capture_default_str();
        cmd->add_option("--ridge", f.ridge, "Ridge stabilizer")->capture_default_str();
        cmd->add_flag("--no-refit", f.no_refit, "Report within-subgroup averages instead of refitting");
        cmd->add_flag("--fixed-rho", f.fixed_rho, "Disable residual balancing of rho");
    };
    add_fit_options(fitc, fit);
    fitc->add_option("--method", fit.method, "Estimator")->capture_default_str()
        ->check(CLI::IsMember({"ghfm", "sflm", "resp", "lm"}));
    fitc->add_option("--lambda", fit.lambda, "Fusion weight")->capture_default_str();
    fitc->add_option("--phi", fit.phi, "Roughness weight")->capture_default_str();
    fitc->add_option("--groups", fit.groups, "Outcome clusters for --method resp");

    PredictArgs pred;
    auto* predictc = app.add_subcommand("predict", "Predict outcomes for subjects in a fitted model");
    add_common(predictc, pred.common, true);
    add_data(predictc, pred.data);
    predictc->add_option("--model", pred.model, "Model JSON")->required();

    EvaluateArgs eval;
    auto* evaluatec = app.add_subcommand("evaluate", "Score predictions (and coefficients against a truth file)");
    add_common(evaluatec, eval.common, true);
    evaluatec->add_option("--pred", eval.preds, "Prediction CSV; repeat once per testing day")->required();
    evaluatec->add_option("--truth", eval.truth, "Ground truth JSON from simulate");
    evaluatec->add_option("--model", eval.model, "Model JSON (needed with --truth)");
    evaluatec->add_option("--csv-row", eval.csv_row, "Also write the metrics as a one-row CSV");
    evaluatec->add_option("--threshold", eval.threshold, "Classification threshold")->capture_default_str();

    TuneArgs tunea;
    auto* tunec = app.add_subcommand("tune", "Select lambda and phi by grid search");
    add_fit_options(tunec, tunea.fit);
    tunec->add_option("--lambda-grid", tunea.lambda_grid, "Comma-separated lambda values");
    tunec->add_option("--phi-grid", tunea.phi_grid, "Comma-separated phi values");
    tunec->add_option("--grid", tunea.grid,
                      "default: lambda 10^{-6..0}, phi 10^{-8..-2}, both / sqrt(n); "
                      "scaled: lambda sd(y)/U^2 x 10^{-2..1.5}, phi {1, 10, 100}")
        ->capture_default_str()
        ->check(CLI::IsMember({"default", "scaled"}));
    tunec->add_option("--criterion", tunea.criterion, "bic or holdout")->capture_default_str()
        ->check(CLI::IsMember({"bic", "holdout"}));
    tunec->add_option("--holdout-file", tunea.holdout_file, "Validation CSV for --criterion holdout");
    tunec->add_option("--bic-c", tunea.bic_c, "Multiplier of the BIC complexity term")->capture_default_str();
    tunec->add_option("--cells-out", tunea.cells_out, "Per-cell scores (CSV)");

    ExportArgs exp;
    auto* exportc = app.add_subcommand("export-curves", "Sample fitted coefficient functions on a grid");
    add_common(exportc, exp.common, true);
    exportc->add_option("--model", exp.model, "Model JSON")->required();
    exportc->add_option("--points", exp.points, "Grid points")->capture_default_str();

    ReproduceArgs rep;
    auto* reproducec = app.add_subcommand("reproduce", "Run a simulation table sweep");
    add_common(reproducec, rep.common, true);
    reproducec->add_option("--table", rep.table, "Table number")->required()->check(CLI::Range(1, 4));
    reproducec->add_option("--n", rep.n, "Subjects per replicate")->capture_default_str()->check(CLI::PositiveNumber);
    reproducec->add_option("--seeds", rep.seeds, "Replicates per row")->capture_default_str()->check(CLI::PositiveNumber);
    reproducec->add_option("--preclusters", rep.preclusters,
                           "Pre-clustering groups K (-1: 6 for n <= 500, else 100; 0: direct)")
        ->capture_default_str();
    reproducec->add_option("--lambda-grid", rep.lambda_grid, "Comma-separated lambda values");
    reproducec->add_option("--phi-grid", rep.phi_grid, "Comma-separated phi values");
    reproducec->add_option("--replicates-out", rep.replicates_out, "Per-replicate scores (CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what());
        return 2;
    }

    try {
        auto threads_of = [](const Common& c) { set_threads(c.threads); };
        if (*simulate) {
            threads_of(sim.common);
            run_simulate(*simulate, sim);
        } else if (*fitc) {
            threads_of(fit.common);
            run_fit(*fitc, fit, out);
        } else if (*predictc) {
            threads_of(pred.common);
            run_predict(*predictc, pred);
        } else if (*evaluatec) {
            threads_of(eval.common);
            run_evaluate(*evaluatec, eval);
        } else if (*tunec) {
            threads_of(tunea.fit.common);
            run_tune(*tunec, tunea, out);
        } else if (*exportc) {
            threads_of(exp.common);
            run_export(*exportc, exp);
        } else if (*reproducec) {
            threads_of(rep.common);
            run_reproduce(*reproducec, rep);
        }
    } catch (const ArgumentError& e) {
        report(err, "argument", e.what());
        return 2;
    } catch (const IngestError& e) {
        report(err, "ingest", e.what());
        return 2;
    } catch (const MappingError& e) {
        report(err, "mapping", e.what());
        return 2;
    } catch (const DomainError& e) {
        report(err, "domain", e.what());
        return 1;
    } catch (const NumericError& e) {
        report(err, "numeric", e.what());
        return 1;
    } catch (const std::exception& e) {
        report(err, "internal", e.what());
        return 1;
    }
    return 0;
}

}  // namespace ghfm
