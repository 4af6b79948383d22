#pragma once

#include "ghfm/bspline.hpp"
#include "ghfm/family.hpp"
#include "ghfm/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ghfm {

/// n subjects, p functional covariates observed on a common m-point grid over
/// [0, T], and one scalar outcome per subject.
struct FunctionalDataset {
    VectorXd grid;
    double t_end = 0.0;
    std::vector<MatrixXd> x;  // one n x m matrix per covariate
    VectorXd y;
    Family family = Family::gaussian;
    std::vector<std::string> subject_ids;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.size()); }
    int m() const { return static_cast<int>(grid.size()); }

    /// Throws ArgumentError on any broken invariant.
    void validate() const;

    /// Rows `rows` of this dataset, in the given order.
    FunctionalDataset subset(const std::vector<int>& rows) const;
};

/// Uniform grid of m points on [0, T] (m = 24, T = 23 gives the hourly grid).
VectorXd uniform_grid(int m, double t_end);

struct CsvSchema {
    int p = 1;
    int m = 24;
    double t_end = 23.0;
    Family family = Family::gaussian;
};

/// Column name of covariate j (0-based) at grid index k: cov<j+1>_t<k>.
std::string covariate_column(int j, int k);

FunctionalDataset read_csv(std::istream& in, const CsvSchema& schema);
FunctionalDataset ingest_csv(const std::string& path, const CsvSchema& schema);

/// Canonical formatting: header in schema order, shortest round-trip doubles.
void write_csv(std::ostream& out, const FunctionalDataset& data);
void write_csv(const std::string& path, const FunctionalDataset& data);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// gamma[j] is the n x L matrix with rows  int B(t) X_ij(t) dt.
struct DesignCache {
    BasisSpec basis;
    std::vector<MatrixXd> gamma;
    std::vector<VectorXd> centering;  // per-covariate mean curve; empty when off
    std::uint64_t key = 0;

    int n() const { return gamma.empty() ? 0 : static_cast<int>(gamma.front().rows()); }
    int p() const { return static_cast<int>(gamma.size()); }
    int L() const { return basis.dimension(); }

    /// n x (p L) design with covariate blocks side by side.
    MatrixXd design() const;
};

/// m x L map taking grid values to gamma: exact quadrature of B times the
/// piecewise-linear interpolant, constant beyond the first/last grid point.
MatrixXd gamma_projection(const VectorXd& grid, const BasisSpec& basis);

struct GammaOptions {
    bool center = false;
};

DesignCache compute_gamma(const FunctionalDataset& data, const BasisSpec& basis, GammaOptions options = {});

/// Design for new observations using the basis and centering of `reference`.
DesignCache compute_gamma_like(const FunctionalDataset& data, const DesignCache& reference);

/// Content hash of (dataset, basis, centering flag), used to key sidecars.
std::uint64_t design_key(const FunctionalDataset& data, const BasisSpec& basis, bool center);

void save_design_cache(const std::string& path, const DesignCache& cache);
/// Loads the sidecar if it exists and carries `key`; otherwise nullopt.
std::optional<DesignCache> load_design_cache(const std::string& path, std::uint64_t key);

/// compute_gamma backed by a binary sidecar at `sidecar_path`.
DesignCache cached_gamma(const FunctionalDataset& data, const BasisSpec& basis, GammaOptions options,
                         const std::string& sidecar_path);

}  // namespace ghfm
