#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mlcomp {

/// One user: a feature vector and its class label.
struct LabeledExample {
    std::vector<double> features;
    std::size_t label = 0;
};

/// An empirical user distribution. All examples share `dim` features and
/// carry labels below `n_classes`.
struct Dataset {
    std::vector<LabeledExample> examples;
    std::size_t n_classes = 0;
    std::size_t dim = 0;
    std::string name;
    std::vector<std::string> label_names;  // original tokens by class index (CSV only)

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }

    /// Throws std::invalid_argument if any invariant is broken.
    void validate() const;
};

struct SplitPair {
    Dataset competition;
    Dataset evaluation;
};

struct NoiseConfig {
    double flip_probability = 0.0;
    std::uint64_t rng_seed = 0;
};

/// Column selector for the label: either a header name or a zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvOptions {
    bool has_header = true;
    ColumnRef label_column = std::size_t{0};
};

/// Reads a comma-separated file. Labels are re-indexed densely in order of
/// first appearance; every other column must parse as a real number.
Dataset load_csv(const std::string& path, const CsvOptions& options);

/// Re-indexes d's labels onto another file's label dictionary. Throws if d
/// carries a token absent from `names`.
Dataset remap_labels(const Dataset& d, const std::vector<std::string>& names);

/// Per-column z-scoring with the population standard deviation. Constant
/// columns become all zero.
Dataset standardize(const Dataset& d);

/// Same transform with column statistics taken from `reference`.
Dataset standardize(const Dataset& d, const Dataset& reference);

/// With probability flip_probability each label is replaced by a uniform draw
/// over all classes (which may reproduce the original).
Dataset inject_label_noise(const Dataset& d, const NoiseConfig& cfg);

/// Samples eval_count examples without replacement for evaluation; the rest,
/// in original order, form the competition set.
SplitPair split(const Dataset& d, std::size_t eval_count, std::uint64_t seed);

struct GaussianMixtureSpec {
    std::size_t n_classes = 2;
    std::size_t dim = 2;
    std::vector<std::vector<double>> means;  // one per class
    double cov_scale = 1.0;
    std::size_t n = 100;
    std::uint64_t seed = 0;
};

/// Labels drawn uniformly over classes; features = class mean + cov_scale * N(0, I).
Dataset synth_gaussian_mixture(const GaussianMixtureSpec& spec);

/// I.i.d. sampling with replacement from a fixed dataset. Draw t depends only
/// on (seed, t), so streams can be replayed or consumed out of order.
class UserStream {
public:
    UserStream(const Dataset& source, std::uint64_t seed);

    std::size_t draw_index(std::uint64_t t) const;
    const LabeledExample& draw(std::uint64_t t) const;

    const Dataset& source() const { return *source_; }
    std::uint64_t seed() const { return seed_; }

private:
    const Dataset* source_;
    std::uint64_t seed_;
};

}  // namespace mlcomp
