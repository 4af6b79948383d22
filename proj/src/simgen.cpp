#include "ghfm/simgen.hpp"

#include "ghfm/family.hpp"
#include "ghfm/parallel.hpp"
#include "ghfm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ghfm {

namespace {

// RNG stream tags; observation streams are offset by the draw index.
constexpr std::uint64_t kBetaStream = 1;
constexpr std::uint64_t kCovariateStream = 100;
constexpr std::uint64_t kOutcomeStream = 200;

int groups_for(int setting) { return setting == 1 ? 4 : 2; }

std::vector<double> merged_breaks(const BasisSpec& a, const BasisSpec& b) {
    std::vector<double> breaks;
    for (int k = 0; k <= a.spans; ++k) breaks.push_back(breakpoint(a, k));
    for (int k = 0; k <= b.spans; ++k) breaks.push_back(breakpoint(b, k));
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return breaks;
}

// int B_x(t) f(t) dt for each X basis function, f given on quadrature nodes.
VectorXd project_on_x_basis(const BasisSpec& x_basis, const QuadratureRule& rule, const VectorXd& f_nodes) {
    return basis_matrix(x_basis, rule.nodes).transpose() * rule.weights.cwiseProduct(f_nodes);
}

}  // namespace

void SimulationOptions::validate() const {
    if (setting < 1 || setting > 3) throw ArgumentError("simulate: setting must be 1, 2 or 3");
    if (n < 1) throw ArgumentError("simulate: n must be positive");
    const int k = groups_for(setting);
    if (n % k != 0)
        throw ArgumentError("simulate: setting " + std::to_string(setting) + " needs n divisible by " + std::to_string(k));
    if (!(sigma_prime >= 0.0) || !(noise_sd >= 0.0)) throw ArgumentError("simulate: standard deviations must be >= 0");
    if (m < 2 || !(t_end > 0.0)) throw ArgumentError("simulate: need m >= 2 and T > 0");
}

std::string simulated_subject_id(int index, int n) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
    std::string digits = std::to_string(index + 1);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "S" + digits;
}

double SyntheticTruth::beta(int subject, double t) const {
    if (kind == TruthKind::spline) return eval_basis(beta_basis, t).dot(beta_coefs.col(subject));
    return functions[labels[subject]] == "sin" ? std::sin(t) : std::cos(t);
}

namespace {

SyntheticTruth make_truth(const SimulationOptions& o) {
    SyntheticTruth truth;
    truth.setting = o.setting;
    truth.groups = groups_for(o.setting);
    truth.alpha = o.alpha;
    truth.sigma_prime = o.setting == 2 ? 0.0 : o.sigma_prime;
    truth.noise_sd = o.noise_sd;
    truth.seed = o.seed;
    truth.options = o;
    truth.x_basis = BasisSpec::with_dimension(0.0, o.t_end, o.x_dim, o.x_degree);
    truth.beta_basis = BasisSpec::with_dimension(0.0, o.t_end, o.beta_dim, o.beta_degree);
    const int block = o.n / truth.groups;
    for (int i = 0; i < o.n; ++i) {
        truth.subject_ids.push_back(simulated_subject_id(i, o.n));
        truth.labels.push_back(i / block);
    }
    if (o.setting == 2) {
        truth.kind = TruthKind::closed_form;
        truth.functions = {"sin", "cos"};
        return truth;
    }
    static const double kSetting1Means[] = {20.0, 6.0, -10.0, -40.0};
    static const double kSetting3Means[] = {3.0, -3.0};
    const int L = truth.beta_basis.dimension();
    truth.beta_coefs.resize(L, o.n);
    parallel_for(static_cast<std::size_t>(o.n), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        Engine eng = make_engine(o.seed, kBetaStream, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> noise(0.0, 1.0);
        const double mean = o.setting == 1 ? kSetting1Means[truth.labels[i]] : kSetting3Means[truth.labels[i]];
        for (int l = 0; l < L; ++l) truth.beta_coefs(l, i) = mean + o.sigma_prime * noise(eng);
    });
    return truth;
}

SimulatedData observe(const SyntheticTruth& truth, int draw) {
    const SimulationOptions& o = truth.options;
    const int n = truth.n();
    const BasisSpec& xb = truth.x_basis;
    const VectorXd grid = uniform_grid(o.m, o.t_end);
    const MatrixXd grid_basis = basis_matrix(xb, grid);

    // Per-subject linear functional of v: eta_i - alpha = v_i^T c_i.
    MatrixXd cross;  // x_dim x beta_dim (spline truth)
    VectorXd sin_proj, cos_proj;
    if (truth.kind == TruthKind::spline) {
        const QuadratureRule rule = piecewise_rule(merged_breaks(xb, truth.beta_basis), std::max(xb.degree, truth.beta_basis.degree) + 1);
        cross = basis_matrix(xb, rule.nodes).transpose() * rule.weights.asDiagonal() * basis_matrix(truth.beta_basis, rule.nodes);
    } else {
        const QuadratureRule rule = composite_rule(xb, 20);
        sin_proj = project_on_x_basis(xb, rule, rule.nodes.array().sin().matrix());
        cos_proj = project_on_x_basis(xb, rule, rule.nodes.array().cos().matrix());
    }

    SimulatedData out;
    out.truth = truth;
    FunctionalDataset& data = out.data;
    data.grid = grid;
    data.t_end = o.t_end;
    data.family = o.setting == 3 ? Family::bernoulli : Family::gaussian;
    data.subject_ids = truth.subject_ids;
    data.x.assign(1, MatrixXd(n, o.m));
    data.y.resize(n);
    out.eta.resize(n);
    const auto draw_tag = static_cast<std::uint64_t>(draw);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        Engine xeng = make_engine(o.seed, kCovariateStream + draw_tag, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal(0.0, 1.0);
        VectorXd v(xb.dimension());
        for (Eigen::Index l = 0; l < v.size(); ++l) v[l] = 3.0 + normal(xeng);
        data.x[0].row(i) = (grid_basis * v).transpose();
        double eta = truth.alpha;
        if (truth.kind == TruthKind::spline)
            eta += v.dot(cross * truth.beta_coefs.col(i));
        else
            eta += v.dot(truth.functions[truth.labels[i]] == "sin" ? sin_proj : cos_proj);
        out.eta[i] = eta;
        Engine yeng = make_engine(o.seed, kOutcomeStream + draw_tag, static_cast<std::uint64_t>(i));
        if (data.family == Family::gaussian) {
            data.y[i] = eta + o.noise_sd * normal(yeng);
        } else {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            data.y[i] = unif(yeng) < sigmoid(eta) ? 1.0 : 0.0;
        }
    });
    data.validate();
    return out;
}

}  // namespace

SimulatedData generate(const SimulationOptions& options) {
    options.validate();
    return observe(make_truth(options), 0);
}

SimulatedData generate_setting1(int n, double sigma_prime, std::uint64_t seed, SimulationOptions options) {
    options.setting = 1;
    options.n = n;
    options.sigma_prime = sigma_prime;
    options.seed = seed;
    return generate(options);
}

SimulatedData generate_setting2(int n, std::uint64_t seed, SimulationOptions options) {
    options.setting = 2;
    options.n = n;
    options.seed = seed;
    return generate(options);
}

SimulatedData generate_setting3(int n, double sigma_prime, std::uint64_t seed, SimulationOptions options) {
    options.setting = 3;
    options.n = n;
    options.sigma_prime = sigma_prime;
    options.seed = seed;
    return generate(options);
}

SimulatedData redraw(const SyntheticTruth& truth, int draw) {
    if (draw < 1) throw ArgumentError("simulate: replicate draws start at 1");
    return observe(truth, draw);
}

}  // namespace ghfm
