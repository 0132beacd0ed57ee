#pragma once

#include "mlcomp/dataset.hpp"
#include "mlcomp/rng.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace mlcomp::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mlcomp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Random d-dimensional examples with labels below k.
inline Dataset random_dataset(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.n_classes = k;
    ds.dim = d;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledExample ex;
        for (std::size_t j = 0; j < d; ++j) ex.features.push_back(standard_normal(rng));
        ex.label = i < k ? i : uniform_index(rng, k);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

}  // namespace mlcomp::testing
