#include "mlcomp/dataset.hpp"

#include "mlcomp/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mlcomp {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    // A trailing comma denotes an empty last cell.
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& cell, std::size_t line_no, std::size_t col) {
    const std::string t = trim(cell);
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw std::runtime_error("load_csv: non-numeric feature '" + t + "' at line " +
                                 std::to_string(line_no) + ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

void Dataset::validate() const {
    if (n_classes < 2) throw std::invalid_argument("Dataset: need at least two classes");
    for (const auto& ex : examples) {
        if (ex.features.size() != dim) throw std::invalid_argument("Dataset: feature length mismatch");
        if (ex.label >= n_classes) throw std::invalid_argument("Dataset: label out of range");
        for (double v : ex.features) {
            if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature");
        }
    }
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    std::size_t arity = 0;
    std::size_t label_col = 0;
    bool label_resolved = false;

    if (options.has_header) {
        if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
        ++line_no;
        const auto header = split_row(line);
        arity = header.size();
        if (const auto* name = std::get_if<std::string>(&options.label_column)) {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (trim(header[i]) == *name) {
                    label_col = i;
                    label_resolved = true;
                }
            }
            if (!label_resolved) throw std::runtime_error("load_csv: no column named '" + *name + "'");
        }
    }
    if (!label_resolved) {
        if (std::holds_alternative<std::string>(options.label_column)) {
            throw std::runtime_error("load_csv: label column by name requires a header row");
        }
        label_col = std::get<std::size_t>(options.label_column);
    }

    Dataset d;
    d.name = path;
    std::unordered_map<std::string, std::size_t> label_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (arity == 0) arity = cells.size();
        if (cells.size() != arity) {
            throw std::runtime_error("load_csv: ragged row at line " + std::to_string(line_no) + " (" +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(arity) + ")");
        }
        if (label_col >= arity) throw std::runtime_error("load_csv: label column index out of range");

        LabeledExample ex;
        ex.features.reserve(arity - 1);
        for (std::size_t c = 0; c < arity; ++c) {
            if (c == label_col) continue;
            ex.features.push_back(parse_real(cells[c], line_no, c));
        }
        const std::string token = trim(cells[label_col]);
        auto [it, inserted] = label_ids.try_emplace(token, label_ids.size());
        ex.label = it->second;
        d.examples.push_back(std::move(ex));
    }
    if (d.examples.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
    d.dim = arity - 1;
    d.n_classes = label_ids.size();
    d.label_names.resize(label_ids.size());
    for (const auto& [token, id] : label_ids) d.label_names[id] = token;
    if (d.n_classes < 2) throw std::runtime_error("load_csv: single-class dataset " + path);
    return d;
}

Dataset remap_labels(const Dataset& d, const std::vector<std::string>& names) {
    if (d.label_names.size() != d.n_classes) throw std::invalid_argument("remap_labels: dataset has no label names");
    std::unordered_map<std::string, std::size_t> target;
    for (std::size_t i = 0; i < names.size(); ++i) target.emplace(names[i], i);
    std::vector<std::size_t> mapping(d.n_classes);
    for (std::size_t c = 0; c < d.n_classes; ++c) {
        const auto it = target.find(d.label_names[c]);
        if (it == target.end()) throw std::invalid_argument("remap_labels: unknown label '" + d.label_names[c] + "'");
        mapping[c] = it->second;
    }
    Dataset out = d;
    for (auto& ex : out.examples) ex.label = mapping[ex.label];
    out.n_classes = names.size();
    out.label_names = names;
    return out;
}

Dataset standardize(const Dataset& d) { return standardize(d, d); }

Dataset standardize(const Dataset& d, const Dataset& reference) {
    if (reference.empty()) throw std::invalid_argument("standardize: empty dataset");
    if (reference.dim != d.dim) throw std::invalid_argument("standardize: dimension mismatch");
    const auto n = static_cast<double>(reference.size());
    std::vector<double> mean(d.dim, 0.0);
    std::vector<double> sd(d.dim, 0.0);
    for (const auto& ex : reference.examples) {
        for (std::size_t j = 0; j < d.dim; ++j) mean[j] += ex.features[j];
    }
    for (auto& m : mean) m /= n;
    for (const auto& ex : reference.examples) {
        for (std::size_t j = 0; j < d.dim; ++j) {
            const double c = ex.features[j] - mean[j];
            sd[j] += c * c;
        }
    }
    for (auto& s : sd) s = std::sqrt(s / n);

    Dataset out = d;
    for (auto& ex : out.examples) {
        for (std::size_t j = 0; j < d.dim; ++j) {
            const double c = ex.features[j] - mean[j];
            // Zero-variance columns stay centered (all zero).
            ex.features[j] = sd[j] > 0.0 ? c / sd[j] : 0.0;
        }
    }
    return out;
}

Dataset inject_label_noise(const Dataset& d, const NoiseConfig& cfg) {
    if (!(cfg.flip_probability >= 0.0 && cfg.flip_probability <= 1.0)) {
        throw std::invalid_argument("inject_label_noise: flip_probability must be in [0, 1]");
    }
    Dataset out = d;
    if (cfg.flip_probability == 0.0) return out;
    Rng rng(cfg.rng_seed);
    for (auto& ex : out.examples) {
        // Both draws are consumed for every example so that the stream of
        // decisions does not depend on earlier outcomes.
        const double u = uniform01(rng);
        const auto replacement = static_cast<std::size_t>(uniform_index(rng, d.n_classes));
        if (u < cfg.flip_probability) ex.label = replacement;
    }
    return out;
}

SplitPair split(const Dataset& d, std::size_t eval_count, std::uint64_t seed) {
    if (eval_count == 0 || eval_count >= d.size()) {
        throw std::invalid_argument("split: eval_count must be in (0, " + std::to_string(d.size()) + ")");
    }
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: the first eval_count slots are a uniform sample.
    for (std::size_t i = 0; i < eval_count; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, d.size() - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> in_eval(d.size(), false);
    for (std::size_t i = 0; i < eval_count; ++i) in_eval[idx[i]] = true;

    SplitPair out;
    for (auto* part : {&out.competition, &out.evaluation}) {
        part->n_classes = d.n_classes;
        part->dim = d.dim;
    }
    out.competition.name = d.name + ":competition";
    out.evaluation.name = d.name + ":evaluation";
    for (std::size_t i = 0; i < eval_count; ++i) out.evaluation.examples.push_back(d.examples[idx[i]]);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!in_eval[i]) out.competition.examples.push_back(d.examples[i]);
    }
    return out;
}

Dataset synth_gaussian_mixture(const GaussianMixtureSpec& spec) {
    if (spec.n_classes < 2) throw std::invalid_argument("synth_gaussian_mixture: need K >= 2");
    if (spec.n < spec.n_classes) throw std::invalid_argument("synth_gaussian_mixture: need n >= K");
    if (!(spec.cov_scale > 0.0)) throw std::invalid_argument("synth_gaussian_mixture: cov_scale must be > 0");
    if (spec.means.size() != spec.n_classes) {
        throw std::invalid_argument("synth_gaussian_mixture: expected one mean per class");
    }
    for (const auto& m : spec.means) {
        if (m.size() != spec.dim) throw std::invalid_argument("synth_gaussian_mixture: mean has wrong dimension");
    }

    Dataset d;
    d.n_classes = spec.n_classes;
    d.dim = spec.dim;
    d.name = "gaussian_mixture";
    d.examples.reserve(spec.n);
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        LabeledExample ex;
        ex.label = static_cast<std::size_t>(uniform_index(rng, spec.n_classes));
        ex.features.resize(spec.dim);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            ex.features[j] = spec.means[ex.label][j] + spec.cov_scale * standard_normal(rng);
        }
        d.examples.push_back(std::move(ex));
    }
    return d;
}

UserStream::UserStream(const Dataset& source, std::uint64_t seed) : source_(&source), seed_(seed) {
    if (source.empty()) throw std::invalid_argument("UserStream: empty source");
}

std::size_t UserStream::draw_index(std::uint64_t t) const {
    Rng rng(derive_seed(seed_, {t & ((1ULL << 20) - 1), t >> 20}));
    return static_cast<std::size_t>(uniform_index(rng, source_->size()));
}

const LabeledExample& UserStream::draw(std::uint64_t t) const {
    return source_->examples[draw_index(t)];
}

}  // namespace mlcomp
