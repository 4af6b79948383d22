#include "ghfm/fdata.hpp"

#include "ghfm/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace ghfm {

void FunctionalDataset::validate() const {
    const int n_ = n();
    if (m() < 1) throw ArgumentError("dataset: empty grid");
    for (int k = 1; k < m(); ++k)
        if (!(grid[k] > grid[k - 1])) throw ArgumentError("dataset: grid must be strictly increasing");
    if (grid[0] < 0.0 || grid[m() - 1] > t_end) throw ArgumentError("dataset: grid must lie in [0, T]");
    if (static_cast<int>(subject_ids.size()) != n_) throw ArgumentError("dataset: subject id count mismatch");
    for (const auto& xj : x)
        if (xj.rows() != n_ || xj.cols() != m()) throw ArgumentError("dataset: covariate shape mismatch");
    if (!y.allFinite()) throw ArgumentError("dataset: non-finite outcome");
    for (const auto& xj : x)
        if (!xj.allFinite()) throw ArgumentError("dataset: non-finite covariate value");
    if (family == Family::bernoulli)
        for (int i = 0; i < n_; ++i)
            if (y[i] != 0.0 && y[i] != 1.0)
                throw ArgumentError("dataset: bernoulli outcome of subject '" + subject_ids[i] + "' is not 0/1");
}

FunctionalDataset FunctionalDataset::subset(const std::vector<int>& rows) const {
    FunctionalDataset out;
    out.grid = grid;
    out.t_end = t_end;
    out.family = family;
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.x.assign(x.size(), MatrixXd(rows.size(), m()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        out.y[r] = y[i];
        out.subject_ids.push_back(subject_ids[i]);
        for (std::size_t j = 0; j < x.size(); ++j) out.x[j].row(r) = x[j].row(i);
    }
    return out;
}

VectorXd uniform_grid(int m, double t_end) {
    if (m == 1) return VectorXd::Zero(1);
    VectorXd grid(m);
    for (int k = 0; k < m; ++k) grid[k] = k == m - 1 ? t_end : t_end * k / (m - 1);
    return grid;
}

std::string covariate_column(int j, int k) { return "cov" + std::to_string(j + 1) + "_t" + std::to_string(k); }

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string where(int row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_cell(const std::string& text, int row, const std::string& column) {
    if (text.empty()) throw IngestError("missing value at " + where(row, column));
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
        throw IngestError("malformed number '" + text + "' at " + where(row, column));
    return value;
}

}  // namespace

FunctionalDataset read_csv(std::istream& in, const CsvSchema& schema) {
    if (schema.p < 1 || schema.m < 1 || !(schema.t_end > 0.0)) throw ArgumentError("csv schema: need p >= 1, m >= 1, T > 0");
    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty csv: missing header");
    const auto header = split_row(line);
    std::map<std::string, int> index;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!index.emplace(header[c], static_cast<int>(c)).second)
            throw IngestError("duplicate column '" + header[c] + "' in header");
    }
    auto column = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw IngestError("missing column '" + name + "'");
        return it->second;
    };
    const int id_col = column("subject_id");
    const int y_col = column("outcome");
    std::vector<std::vector<int>> cov_cols(schema.p, std::vector<int>(schema.m));
    for (int j = 0; j < schema.p; ++j)
        for (int k = 0; k < schema.m; ++k) cov_cols[j][k] = column(covariate_column(j, k));

    std::vector<std::string> ids;
    std::vector<double> ys;
    std::vector<std::vector<double>> values(schema.p);
    std::unordered_set<std::string> seen;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells = split_row(line);
        if (cells.size() != header.size())
            throw IngestError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                              " cells, found " + std::to_string(cells.size()));
        const std::string& id = cells[id_col];
        if (id.empty()) throw IngestError("missing value at " + where(row, "subject_id"));
        if (!seen.insert(id).second) throw IngestError("duplicate subject_id '" + id + "' at row " + std::to_string(row));
        const double y = parse_cell(cells[y_col], row, "outcome");
        if (schema.family == Family::bernoulli && y != 0.0 && y != 1.0)
            throw IngestError("bernoulli outcome must be 0 or 1; got '" + cells[y_col] + "' at " + where(row, "outcome"));
        ids.push_back(id);
        ys.push_back(y);
        for (int j = 0; j < schema.p; ++j)
            for (int k = 0; k < schema.m; ++k)
                values[j].push_back(parse_cell(cells[cov_cols[j][k]], row, covariate_column(j, k)));
    }

    FunctionalDataset data;
    const int n = static_cast<int>(ids.size());
    data.grid = uniform_grid(schema.m, schema.t_end);
    data.t_end = schema.t_end;
    data.family = schema.family;
    data.subject_ids = std::move(ids);
    data.y = Eigen::Map<VectorXd>(ys.data(), n);
    for (int j = 0; j < schema.p; ++j)
        data.x.push_back(Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            values[j].data(), n, schema.m));
    data.validate();
    return data;
}

FunctionalDataset ingest_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return read_csv(in, schema);
}

void write_csv(std::ostream& out, const FunctionalDataset& data) {
    out << "subject_id,outcome";
    for (int j = 0; j < data.p(); ++j)
        for (int k = 0; k < data.m(); ++k) out << ',' << covariate_column(j, k);
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        out << data.subject_ids[i] << ',' << format_double(data.y[i]);
        for (int j = 0; j < data.p(); ++j)
            for (int k = 0; k < data.m(); ++k) out << ',' << format_double(data.x[j](i, k));
        out << '\n';
    }
}

void write_csv(const std::string& path, const FunctionalDataset& data) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path + "'");
    write_csv(out, data);
}

MatrixXd DesignCache::design() const {
    const int L_ = L();
    MatrixXd out(n(), p() * L_);
    for (int j = 0; j < p(); ++j) out.middleCols(j * L_, L_) = gamma[j];
    return out;
}

MatrixXd gamma_projection(const VectorXd& grid, const BasisSpec& basis) {
    const int m = static_cast<int>(grid.size());
    std::vector<double> breaks;
    for (int k = 0; k <= basis.spans; ++k) breaks.push_back(breakpoint(basis, k));
    for (int k = 0; k < m; ++k)
        if (grid[k] > basis.t0 && grid[k] < basis.t1) breaks.push_back(grid[k]);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const QuadratureRule rule = piecewise_rule(breaks, basis.degree + 1);

    // Interpolation weights from grid values to the quadrature nodes.
    MatrixXd interp = MatrixXd::Zero(rule.size(), m);
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        if (m == 1 || t <= grid[0]) {
            interp(q, 0) = 1.0;
        } else if (t >= grid[m - 1]) {
            interp(q, m - 1) = 1.0;
        } else {
            const int k = static_cast<int>(std::upper_bound(grid.data(), grid.data() + m, t) - grid.data()) - 1;
            const double s = (t - grid[k]) / (grid[k + 1] - grid[k]);
            interp(q, k) = 1.0 - s;
            interp(q, k + 1) = s;
        }
    }
    return interp.transpose() * rule.weights.asDiagonal() * basis_matrix(basis, rule.nodes);
}

namespace {

DesignCache build_design(const FunctionalDataset& data, const BasisSpec& basis, const std::vector<VectorXd>& centering) {
    basis.validate();
    if (data.grid[0] < basis.t0 || data.grid[data.m() - 1] > basis.t1)
        throw ArgumentError("design: grid extends beyond the basis domain");
    const MatrixXd projection = gamma_projection(data.grid, basis);
    DesignCache cache;
    cache.basis = basis;
    cache.centering = centering;
    cache.gamma.assign(data.p(), MatrixXd(data.n(), basis.dimension()));
    for (int j = 0; j < data.p(); ++j) {
        // Rows are independent; each worker fills its own slots.
        parallel_for(static_cast<std::size_t>(data.n()), [&](std::size_t i) {
            Eigen::RowVectorXd xi = data.x[j].row(static_cast<Eigen::Index>(i));
            if (!centering.empty()) xi -= centering[j].transpose();
            cache.gamma[j].row(static_cast<Eigen::Index>(i)) = xi * projection;
        });
    }
    return cache;
}

}  // namespace

DesignCache compute_gamma(const FunctionalDataset& data, const BasisSpec& basis, GammaOptions options) {
    std::vector<VectorXd> centering;
    if (options.center)
        for (const auto& xj : data.x) centering.push_back(xj.colwise().mean().transpose());
    DesignCache cache = build_design(data, basis, centering);
    cache.key = design_key(data, basis, options.center);
    return cache;
}

DesignCache compute_gamma_like(const FunctionalDataset& data, const DesignCache& reference) {
    if (data.p() != reference.p()) throw ArgumentError("design: covariate count differs from the fitted design");
    DesignCache cache = build_design(data, reference.basis, reference.centering);
    cache.key = design_key(data, reference.basis, !reference.centering.empty());
    return cache;
}

namespace {

struct Fnv1a {
    std::uint64_t state = 1469598103934665603ull;
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state ^= p[i];
            state *= 1099511628211ull;
        }
    }
    template <typename T>
    void value(const T& v) {
        bytes(&v, sizeof v);
    }
};

constexpr char kSidecarMagic[8] = {'G', 'H', 'F', 'M', 'G', 'A', 'M', '1'};

}  // namespace

std::uint64_t design_key(const FunctionalDataset& data, const BasisSpec& basis, bool center) {
    Fnv1a h;
    h.value(data.n());
    h.value(data.p());
    h.value(data.m());
    h.value(data.t_end);
    h.bytes(data.grid.data(), sizeof(double) * data.grid.size());
    for (const auto& xj : data.x) h.bytes(xj.data(), sizeof(double) * xj.size());
    h.value(basis.t0);
    h.value(basis.t1);
    h.value(basis.degree);
    h.value(basis.spans);
    h.value(center);
    return h.state;
}

void save_design_cache(const std::string& path, const DesignCache& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write design sidecar '" + path + "'");
    auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write(kSidecarMagic, sizeof kSidecarMagic);
    put(cache.key);
    put(cache.basis.t0);
    put(cache.basis.t1);
    put(static_cast<std::int64_t>(cache.basis.degree));
    put(static_cast<std::int64_t>(cache.basis.spans));
    put(static_cast<std::int64_t>(cache.p()));
    put(static_cast<std::int64_t>(cache.n()));
    for (const auto& g : cache.gamma) out.write(reinterpret_cast<const char*>(g.data()), sizeof(double) * g.size());
    put(static_cast<std::int64_t>(cache.centering.size()));
    for (const auto& c : cache.centering) {
        put(static_cast<std::int64_t>(c.size()));
        out.write(reinterpret_cast<const char*>(c.data()), sizeof(double) * c.size());
    }
}

std::optional<DesignCache> load_design_cache(const std::string& path, std::uint64_t key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    auto get = [&](auto& v) { return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v)); };
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kSidecarMagic, sizeof magic) != 0) return std::nullopt;
    DesignCache cache;
    std::int64_t degree = 0, spans = 0, p = 0, n = 0, ncenter = 0;
    if (!get(cache.key) || cache.key != key) return std::nullopt;
    if (!get(cache.basis.t0) || !get(cache.basis.t1) || !get(degree) || !get(spans) || !get(p) || !get(n))
        return std::nullopt;
    cache.basis.degree = static_cast<int>(degree);
    cache.basis.spans = static_cast<int>(spans);
    for (std::int64_t j = 0; j < p; ++j) {
        MatrixXd g(n, cache.basis.dimension());
        if (!in.read(reinterpret_cast<char*>(g.data()), sizeof(double) * g.size())) return std::nullopt;
        cache.gamma.push_back(std::move(g));
    }
    if (!get(ncenter)) return std::nullopt;
    for (std::int64_t j = 0; j < ncenter; ++j) {
        std::int64_t len = 0;
        if (!get(len)) return std::nullopt;
        VectorXd c(len);
        if (!in.read(reinterpret_cast<char*>(c.data()), sizeof(double) * c.size())) return std::nullopt;
        cache.centering.push_back(std::move(c));
    }
    return cache;
}

DesignCache cached_gamma(const FunctionalDataset& data, const BasisSpec& basis, GammaOptions options,
                         const std::string& sidecar_path) {
    const std::uint64_t key = design_key(data, basis, options.center);
    if (auto hit = load_design_cache(sidecar_path, key)) return *std::move(hit);
    DesignCache cache = compute_gamma(data, basis, options);
    save_design_cache(sidecar_path, cache);
    return cache;
}

}  // namespace ghfm
