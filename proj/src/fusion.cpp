#include "ghfm/fusion.hpp"

#include "ghfm/arrow.hpp"
#include "ghfm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace ghfm {

void PenaltyConfig::validate() const {
    if (!(lambda >= 0.0) || !(phi >= 0.0) || !(ridge >= 0.0))
        throw ArgumentError("penalty: lambda, phi and ridge must be nonnegative");
    if (!(rho > 0.0)) throw ArgumentError("penalty: rho must be positive");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw ArgumentError("penalty: tolerances must be positive");
    if (max_iters < 1) throw ArgumentError("penalty: max_iters must be >= 1");
}

UnitMap UnitMap::identity(int n) {
    UnitMap map;
    map.units = n;
    map.unit_of_subject.resize(n);
    std::iota(map.unit_of_subject.begin(), map.unit_of_subject.end(), 0);
    return map;
}

UnitMap UnitMap::from_groups(std::vector<int> groups, int K) {
    for (int g : groups)
        if (g < 0 || g >= K) throw ArgumentError("unit map: group label out of range");
    return {K, std::move(groups)};
}

bool UnitMap::is_identity() const {
    if (units != static_cast<int>(unit_of_subject.size())) return false;
    for (int i = 0; i < units; ++i)
        if (unit_of_subject[i] != i) return false;
    return true;
}

std::vector<std::vector<int>> Partition::members() const {
    std::vector<std::vector<int>> out(count);
    for (std::size_t u = 0; u < subgroup_of_unit.size(); ++u) out[subgroup_of_unit[u]].push_back(static_cast<int>(u));
    return out;
}

std::vector<std::pair<int, int>> FusionGraph::all_pairs(int units) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(units) * (units - 1) / 2);
    for (int a = 0; a < units; ++a)
        for (int b = a + 1; b < units; ++b) pairs.emplace_back(a, b);
    return pairs;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

Partition label_components(UnionFind& uf, int units) {
    Partition part;
    part.subgroup_of_unit.assign(units, -1);
    std::vector<int> label_of_root(units, -1);
    for (int u = 0; u < units; ++u) {
        const int root = uf.find(u);
        if (label_of_root[root] < 0) label_of_root[root] = part.count++;
        part.subgroup_of_unit[u] = label_of_root[root];
    }
    return part;
}

}  // namespace

Partition partition_from_fused_pairs(int units, const std::vector<std::pair<int, int>>& fused) {
    UnionFind uf(units);
    for (auto [a, b] : fused) uf.unite(a, b);
    return label_components(uf, units);
}

std::vector<Partition> extract_subgroups(const FusionGraph& graph) {
    std::vector<Partition> parts;
    for (int j = 0; j < graph.p; ++j) {
        UnionFind uf(graph.units);
        const MatrixXd& z = graph.node_values[j];
        for (std::size_t k = 0; k < graph.pairs.size(); ++k) {
            if ((z.col(static_cast<Eigen::Index>(k)).array() == 0.0).all()) uf.unite(graph.pairs[k].first, graph.pairs[k].second);
        }
        parts.push_back(label_components(uf, graph.units));
    }
    return parts;
}

std::vector<int> FitResult::subject_subgroups(int j) const {
    std::vector<int> out(unit_of_subject.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = partitions[j].subgroup_of_unit[unit_of_subject[i]];
    return out;
}

FusionContext FusionContext::make(const DesignCache& cache) {
    FusionContext ctx;
    ctx.basis = cache.basis;
    ctx.rule = composite_rule(cache.basis);
    ctx.node_basis = basis_matrix(cache.basis, ctx.rule.nodes);
    ctx.roughness = roughness_block(cache.basis, ctx.rule);
    ctx.node_gram = ctx.node_basis.transpose() * ctx.node_basis;
    ctx.design = cache.design();
    ctx.p = cache.p();
    return ctx;
}

VectorXd linear_predictor(const CoefficientSet& coefs, const MatrixXd& design, std::span<const int> unit_of_subject) {
    VectorXd eta(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i)
        eta[i] = coefs.intercept(unit_of_subject[i]) + design.row(i).dot(coefs.coefs.col(unit_of_subject[i]));
    return eta;
}

namespace {

void check_units(const FunctionalDataset& data, const FusionContext& ctx, const UnitMap& units) {
    if (static_cast<int>(units.unit_of_subject.size()) != data.n() || ctx.design.rows() != data.n())
        throw ArgumentError("fusion: unit map / design does not match the dataset");
    if (units.units < 1) throw ArgumentError("fusion: need at least one unit");
    std::vector<int> seen(units.units, 0);
    for (int u : units.unit_of_subject) {
        if (u < 0 || u >= units.units) throw ArgumentError("fusion: unit index out of range");
        seen[u] = 1;
    }
    for (int u = 0; u < units.units; ++u)
        if (!seen[u]) throw ArgumentError("fusion: unit " + std::to_string(u + 1) + " has no subjects");
}

// Smooth part: (1/n) sum nll + sum_u b_u^T Omega b_u.
double smooth_objective(const FunctionalDataset& data, const FusionContext& ctx, const UnitMap& units,
                        const MatrixXd& omega, double alpha, const MatrixXd& coefs) {
    const VectorXd eta = grouped_eta(ctx.design, units.unit_of_subject, alpha, coefs);
    double value = total_nll(data.family, data.y, eta) / data.n();
    value += (coefs.transpose() * omega * coefs).trace();
    return value;
}

// lambda * 2 * sum_{a<b} sum_q w_q |(V b_a - V b_b)_q|, from node values V b (Q x U).
double fusion_term(const std::vector<MatrixXd>& node_values, const VectorXd& weights,
                   const std::vector<std::pair<int, int>>& pairs, double lambda) {
    if (lambda == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& nv : node_values)
        for (auto [a, b] : pairs) sum += weights.dot((nv.col(a) - nv.col(b)).cwiseAbs());
    return 2.0 * lambda * sum;
}

std::vector<MatrixXd> node_values_of(const FusionContext& ctx, const MatrixXd& coefs) {
    std::vector<MatrixXd> out;
    for (int j = 0; j < ctx.p; ++j) out.push_back(ctx.node_basis * coefs.middleRows(j * ctx.L(), ctx.L()));
    return out;
}

}  // namespace

double fused_objective(const CoefficientSet& coefs, const FunctionalDataset& data, const FusionContext& ctx,
                       const UnitMap& units, const PenaltyConfig& config) {
    check_units(data, ctx, units);
    if (coefs.p != ctx.p || coefs.L != ctx.L() || coefs.units() != units.units ||
        coefs.coefs.rows() != static_cast<Eigen::Index>(ctx.p) * ctx.L())
        throw ArgumentError("fused objective: coefficient dimensions do not match");
    const MatrixXd omega = penalty_matrix(ctx.roughness, ctx.p, config.phi, config.ridge);
    const auto pairs = FusionGraph::all_pairs(units.units);
    return smooth_objective(data, ctx, units, omega, coefs.alpha, coefs.coefs) +
           fusion_term(node_values_of(ctx, coefs.coefs), ctx.rule.weights, pairs, config.lambda);
}

double fused_objective(const CoefficientSet& coefs, const FunctionalDataset& data, const DesignCache& cache,
                       const UnitMap& units, const PenaltyConfig& config) {
    return fused_objective(coefs, data, FusionContext::make(cache), units, config);
}

CoefficientSet refit_subgroups(const FunctionalDataset& data, const FusionContext& ctx, const UnitMap& units,
                               const std::vector<Partition>& partitions, const PenaltyConfig& config,
                               std::vector<MatrixXd>* subgroup_coefs) {
    const int p = ctx.p, L = ctx.L(), n = data.n();
    bool shared = true;
    for (int j = 1; j < p; ++j) shared = shared && partitions[j].subgroup_of_unit == partitions[0].subgroup_of_unit;

    CoefficientSet out = CoefficientSet::zeros(units.units, p, L);
    std::vector<MatrixXd> per_cov(p);
    if (shared) {
        std::vector<int> group(n);
        for (int i = 0; i < n; ++i) group[i] = partitions[0].subgroup_of_unit[units.unit_of_subject[i]];
        GroupedProblem problem{ctx.design, data.y, data.family, group, partitions[0].count,
                               penalty_matrix(ctx.roughness, p, config.phi, config.ridge)};
        const GroupedFit fit = fit_grouped(problem);
        out.alpha = fit.alpha;
        for (int j = 0; j < p; ++j) per_cov[j] = fit.coefs.middleRows(j * L, L);
    } else {
        // Covariates disagree on the partition: one dense system over all
        // (covariate, subgroup) blocks.
        std::vector<int> offset(p + 1, 0);
        for (int j = 0; j < p; ++j) offset[j + 1] = offset[j] + partitions[j].count * L;
        MatrixXd expanded = MatrixXd::Zero(n, offset[p]);
        MatrixXd omega = MatrixXd::Zero(offset[p], offset[p]);
        for (int j = 0; j < p; ++j) {
            for (int s = 0; s < partitions[j].count; ++s)
                omega.block(offset[j] + s * L, offset[j] + s * L, L, L) = config.phi * ctx.roughness;
            for (int i = 0; i < n; ++i) {
                const int s = partitions[j].subgroup_of_unit[units.unit_of_subject[i]];
                expanded.block(i, offset[j] + s * L, 1, L) = ctx.design.block(i, j * L, 1, L);
            }
        }
        omega.diagonal().array() += config.ridge;
        const std::vector<int> one(n, 0);
        GroupedProblem problem{expanded, data.y, data.family, one, 1, omega};
        const GroupedFit fit = fit_grouped(problem);
        out.alpha = fit.alpha;
        for (int j = 0; j < p; ++j)
            per_cov[j] = Eigen::Map<const MatrixXd>(fit.coefs.data() + offset[j], L, partitions[j].count);
    }
    for (int j = 0; j < p; ++j)
        for (int u = 0; u < units.units; ++u) out.block(u, j) = per_cov[j].col(partitions[j].subgroup_of_unit[u]);
    if (subgroup_coefs != nullptr) *subgroup_coefs = std::move(per_cov);
    return out;
}

namespace {

// Splitting solver state and the two primal updates.
class Splitting {
public:
    Splitting(const FunctionalDataset& data, const FusionContext& ctx, const UnitMap& units, const PenaltyConfig& config)
        : data_(data), ctx_(ctx), units_(units), config_(config) {
        p_ = ctx.p;
        L_ = ctx.L();
        Q_ = ctx.Q();
        U_ = units.units;
        D_ = p_ * L_;
        n_ = data.n();
        pairs_ = FusionGraph::all_pairs(U_);
        omega_ = penalty_matrix(ctx.roughness, p_, config.phi, config.ridge);
        gtilde_ = MatrixXd::Zero(D_, D_);
        for (int j = 0; j < p_; ++j) gtilde_.block(j * L_, j * L_, L_, L_) = ctx.node_gram;
        members_.resize(U_);
        for (int i = 0; i < n_; ++i) members_[units.unit_of_subject[i]].push_back(i);
        base_rhs_ = MatrixXd::Zero(D_, U_);
        for (int i = 0; i < n_; ++i)
            base_rhs_.col(units.unit_of_subject[i]) += data.y[i] / n_ * ctx.design.row(i).transpose();
    }

    void init(const SplittingState* warm) {
        const auto P = static_cast<Eigen::Index>(pairs_.size());
        if (warm != nullptr && warm->coefs.rows() == D_ && warm->coefs.cols() == U_ &&
            static_cast<int>(warm->z.size()) == p_ && warm->z.front().cols() == P) {
            alpha_ = warm->alpha;
            b_ = warm->coefs;
            z_ = warm->z;
            u_ = warm->duals;
            rho_ = warm->rho;
        } else {
            alpha_ = 0.0;
            b_ = MatrixXd::Zero(D_, U_);
            z_.assign(p_, MatrixXd::Zero(Q_, P));
            u_.assign(p_, MatrixXd::Zero(Q_, P));
            rho_ = config_.rho;
        }
        factor_gaussian();
    }

    // Refactor after a rho change (Gaussian keeps one factorization).
    void factor_gaussian() {
        if (data_.family != Family::gaussian) return;
        assemble(VectorXd::Ones(n_), system_);
    }

    void assemble(const VectorXd& weights, ArrowSystem& system) const {
        std::vector<MatrixXd> blocks(U_);
        MatrixXd coupling = MatrixXd::Zero(D_, U_);
        double corner = 0.0;
        parallel_for(static_cast<std::size_t>(U_), [&](std::size_t uu) {
            const int u = static_cast<int>(uu);
            MatrixXd block = 2.0 * omega_;
            if (U_ > 1) block += rho_ * U_ * gtilde_;
            for (int i : members_[u]) {
                const double w = weights[i] / n_;
                block.selfadjointView<Eigen::Lower>().rankUpdate(ctx_.design.row(i).transpose(), w);
                coupling.col(u) += w * ctx_.design.row(i).transpose();
            }
            blocks[u] = block.selfadjointView<Eigen::Lower>();
        });
        for (int i = 0; i < n_; ++i) corner += weights[i] / n_;
        system.factor(blocks, coupling, corner, U_ > 1 ? rho_ : 0.0, gtilde_);
    }

    // V^T applied to per-unit accumulations of a pair-indexed field.
    MatrixXd scatter(const std::vector<MatrixXd>& field) const {
        MatrixXd out(D_, U_);
        MatrixXd acc(Q_, U_);
        for (int j = 0; j < p_; ++j) {
            acc.setZero();
            for (std::size_t k = 0; k < pairs_.size(); ++k) {
                const auto [a, b] = pairs_[k];
                acc.col(a) += field[j].col(static_cast<Eigen::Index>(k));
                acc.col(b) -= field[j].col(static_cast<Eigen::Index>(k));
            }
            out.middleRows(j * L_, L_).noalias() = ctx_.node_basis.transpose() * acc;
        }
        return out;
    }

    void update_coefficients() {
        std::vector<MatrixXd> target(p_);
        for (int j = 0; j < p_; ++j) target[j] = z_[j] - u_[j];
        const MatrixXd pull = scatter(target);
        if (data_.family == Family::gaussian) {
            auto sol = system_.solve(data_.y.mean(), base_rhs_ + rho_ * pull);
            alpha_ = sol.alpha;
            b_ = std::move(sol.b);
        } else {
            newton_subproblem(pull);
        }
    }

    // Damped Newton on likelihood + penalties + (rho/2) sum |V(b_a - b_b) - (z - u)|^2.
    void newton_subproblem(const MatrixXd& pull) {
        auto value = [&](double a, const MatrixXd& b) {
            const VectorXd s = b.rowwise().sum();
            double v = smooth_objective(data_, ctx_, units_, omega_, a, b);
            v += 0.5 * rho_ * (U_ * (b.transpose() * gtilde_ * b).trace() - s.dot(gtilde_ * s));
            v -= rho_ * b.cwiseProduct(pull).sum();
            return v;
        };
        double current = value(alpha_, b_);
        ArrowSystem system;
        for (int iter = 0; iter < 50; ++iter) {
            const VectorXd eta = grouped_eta(ctx_.design, units_.unit_of_subject, alpha_, b_);
            VectorXd weights(n_);
            double grad_alpha = 0.0;
            const VectorXd s = b_.rowwise().sum();
            MatrixXd grad = 2.0 * omega_ * b_ + rho_ * U_ * gtilde_ * b_ - rho_ * pull;
            grad.colwise() -= rho_ * (gtilde_ * s);
            for (int i = 0; i < n_; ++i) {
                const Curvature c = grad_hess(data_.family, data_.y[i], eta[i]);
                weights[i] = c.hess;
                grad_alpha += c.grad / n_;
                grad.col(units_.unit_of_subject[i]) += c.grad / n_ * ctx_.design.row(i).transpose();
            }
            if (std::max(std::abs(grad_alpha), grad.cwiseAbs().maxCoeff()) < 1e-8) break;
            assemble(weights, system);
            const auto step = system.solve(-grad_alpha, -grad);
            const double slope = grad_alpha * step.alpha + grad.cwiseProduct(step.b).sum();
            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 50; ++ls) {
                const double a = alpha_ + t * step.alpha;
                MatrixXd b = b_ + t * step.b;
                const double v = value(a, b);
                if (v <= current + 1e-4 * t * slope) {
                    moved = current - v > 1e-15 * std::max(1.0, std::abs(v));
                    alpha_ = a;
                    b_ = std::move(b);
                    current = v;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
        }
    }

    struct Residuals {
        double primal, dual, eps_primal, eps_dual;
    };

    Residuals update_splitting() {
        const double lambda = config_.lambda;
        const VectorXd kappa = (2.0 * lambda / rho_) * ctx_.rule.weights;
        node_values_ = node_values_of(ctx_, b_);
        std::vector<MatrixXd> dz(p_);
        double primal2 = 0.0, diff2 = 0.0, z2 = 0.0;
        for (int j = 0; j < p_; ++j) {
            dz[j].resize(Q_, static_cast<Eigen::Index>(pairs_.size()));
            const MatrixXd& nv = node_values_[j];
            for (std::size_t k = 0; k < pairs_.size(); ++k) {
                const auto [a, b] = pairs_[k];
                const auto kk = static_cast<Eigen::Index>(k);
                for (int q = 0; q < Q_; ++q) {
                    const double d = nv(q, a) - nv(q, b);
                    const double v = d + u_[j](q, kk);
                    const double mag = std::abs(v) - kappa[q];
                    const double z = mag > 0.0 ? std::copysign(mag, v) : 0.0;
                    dz[j](q, kk) = z - z_[j](q, kk);
                    z_[j](q, kk) = z;
                    u_[j](q, kk) = v - z;
                    primal2 += (d - z) * (d - z);
                    diff2 += d * d;
                    z2 += z * z;
                }
            }
        }
        const double dual = rho_ * scatter(dz).norm();
        const double dual_scale = rho_ * scatter(u_).norm();
        const double dims_primal = static_cast<double>(p_) * Q_ * pairs_.size();
        const double dims_dual = static_cast<double>(D_) * U_;
        return {std::sqrt(primal2), dual,
                std::sqrt(dims_primal) * config_.tol_primal + config_.tol_primal * std::max(std::sqrt(diff2), std::sqrt(z2)),
                std::sqrt(dims_dual) * config_.tol_dual + config_.tol_dual * dual_scale};
    }

    double objective() const {
        return smooth_objective(data_, ctx_, units_, omega_, alpha_, b_) +
               fusion_term(node_values_, ctx_.rule.weights, pairs_, config_.lambda);
    }

    void rescale_rho(double factor) {
        rho_ *= factor;
        for (auto& u : u_) u /= factor;
        factor_gaussian();
    }

    double rho() const { return rho_; }
    double alpha() const { return alpha_; }
    const MatrixXd& coefs() const { return b_; }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

    SplittingState state() const { return {alpha_, b_, z_, u_, rho_}; }
    FusionGraph graph() const { return {U_, p_, pairs_, z_, u_}; }

private:
    const FunctionalDataset& data_;
    const FusionContext& ctx_;
    const UnitMap& units_;
    const PenaltyConfig& config_;
    int p_ = 1, L_ = 0, Q_ = 0, U_ = 0, D_ = 0, n_ = 0;
    std::vector<std::pair<int, int>> pairs_;
    MatrixXd omega_, gtilde_, base_rhs_;
    std::vector<std::vector<int>> members_;
    ArrowSystem system_;
    double alpha_ = 0.0, rho_ = 1.0;
    MatrixXd b_;
    std::vector<MatrixXd> z_, u_, node_values_;
};

}  // namespace

FitResult fit_fused(const FunctionalDataset& data, const FusionContext& ctx, const UnitMap& units,
                    const PenaltyConfig& config, const SplittingState* warm) {
    config.validate();
    check_units(data, ctx, units);
    if (units.is_identity() && units.units > config.max_direct_units)
        throw ArgumentError("fusion: direct subject-level fit limited to " + std::to_string(config.max_direct_units) +
                            " subjects; pre-cluster first");

    FitResult result;
    result.family = data.family;
    result.basis = ctx.basis;
    result.config = config;
    result.subject_ids = data.subject_ids;
    result.unit_of_subject = units.unit_of_subject;

    Splitting solver(data, ctx, units, config);
    solver.init(warm);
    FitDiagnostics& diag = result.diagnostics;
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        solver.update_coefficients();
        const auto res = solver.update_splitting();
        diag.iterations = iter;
        diag.primal_residual = res.primal;
        diag.dual_residual = res.dual;
        diag.objective_trajectory.push_back(solver.objective());
        if (res.primal <= res.eps_primal && res.dual <= res.eps_dual) {
            diag.converged = true;
            break;
        }
        if (config.adaptive_rho && iter % 10 == 0) {
            if (res.primal > 10.0 * res.dual)
                solver.rescale_rho(2.0);
            else if (res.dual > 10.0 * res.primal)
                solver.rescale_rho(0.5);
        }
    }
    diag.final_rho = solver.rho();

    const FusionGraph graph = solver.graph();
    result.partitions = extract_subgroups(graph);
    result.state = solver.state();

    // Splitting iterate averaged within each estimated subgroup: fused units
    // share one function, so the fusion term between them is exactly zero.
    CoefficientSet averaged = CoefficientSet::zeros(units.units, ctx.p, ctx.L());
    averaged.alpha = solver.alpha();
    std::vector<MatrixXd> averaged_subgroups;
    for (int j = 0; j < ctx.p; ++j) {
        const Partition& part = result.partitions[j];
        MatrixXd means = MatrixXd::Zero(ctx.L(), part.count);
        std::vector<int> sizes(part.count, 0);
        for (int u = 0; u < units.units; ++u) {
            means.col(part.subgroup_of_unit[u]) += solver.coefs().col(u).segment(j * ctx.L(), ctx.L());
            ++sizes[part.subgroup_of_unit[u]];
        }
        for (int s = 0; s < part.count; ++s) means.col(s) /= sizes[s];
        for (int u = 0; u < units.units; ++u) averaged.block(u, j) = means.col(part.subgroup_of_unit[u]);
        averaged_subgroups.push_back(std::move(means));
    }

    CoefficientSet zero = CoefficientSet::zeros(units.units, ctx.p, ctx.L());
    diag.objective_at_zero = fused_objective(zero, data, ctx, units, config);
    // The refit charges the roughness term once per subgroup rather than once
    // per unit, so sanity is checked on the averaged iterate.
    diag.objective_at_solution = fused_objective(averaged, data, ctx, units, config);

    if (config.refit) {
        result.coefs = refit_subgroups(data, ctx, units, result.partitions, config, &result.subgroup_coefs);
    } else {
        result.coefs = std::move(averaged);
        result.subgroup_coefs = std::move(averaged_subgroups);
    }

    diag.objective_sane = diag.objective_at_solution <= diag.objective_at_zero;
    return result;
}

FitResult fit_fused(const FunctionalDataset& data, const DesignCache& cache, const UnitMap& units,
                    const PenaltyConfig& config, const SplittingState* warm) {
    return fit_fused(data, FusionContext::make(cache), units, config, warm);
}

Prediction predict(const FitResult& fit, const FunctionalDataset& data, const DesignCache& cache) {
    if (cache.n() != data.n() || cache.p() != fit.coefs.p || cache.L() != fit.coefs.L)
        throw ArgumentError("predict: design does not match the fitted model");
    std::unordered_map<std::string, int> unit_of_id;
    for (std::size_t i = 0; i < fit.subject_ids.size(); ++i) unit_of_id.emplace(fit.subject_ids[i], fit.unit_of_subject[i]);
    std::vector<int> units(data.n());
    for (int i = 0; i < data.n(); ++i) {
        auto it = unit_of_id.find(data.subject_ids[i]);
        if (it == unit_of_id.end()) throw MappingError("predict: unknown subject_id '" + data.subject_ids[i] + "'");
        units[i] = it->second;
    }
    Prediction pred;
    pred.eta = linear_predictor(fit.coefs, cache.design(), units);
    pred.response = pred.eta.unaryExpr([&](double e) { return mean_response(fit.family, e); });
    if (fit.family == Family::bernoulli)
        for (Eigen::Index i = 0; i < pred.response.size(); ++i) pred.labels.push_back(pred.response[i] >= 0.5 ? 1 : 0);
    return pred;
}

}  // namespace ghfm
