#pragma once

#include "ghfm/fdata.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace fixtures {

/// Random dataset on the hourly grid; y is either Gaussian noise or coin flips.
inline ghfm::FunctionalDataset random_dataset(int n, int p, std::uint64_t seed,
                                              ghfm::Family family = ghfm::Family::gaussian, int m = 24,
                                              double t_end = 23.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ghfm::FunctionalDataset data;
    data.grid = ghfm::uniform_grid(m, t_end);
    data.t_end = t_end;
    data.family = family;
    data.x.assign(p, ghfm::MatrixXd(n, m));
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        data.subject_ids.push_back("id" + std::to_string(i + 1));
        for (int j = 0; j < p; ++j)
            for (int k = 0; k < m; ++k) data.x[j](i, k) = 1.0 + normal(rng);
        data.y[i] = family == ghfm::Family::gaussian ? normal(rng) : (normal(rng) > 0 ? 1.0 : 0.0);
    }
    return data;
}

/// Scratch directory unique to one test case, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("ghfm_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
