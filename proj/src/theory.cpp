#include "mlcomp/theory.hpp"

#include "mlcomp/environment.hpp"
#include "mlcomp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlcomp {

double k_closed_form(double z, double alpha) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("k_closed_form: z must be in [0, 1]");
    if (!(alpha >= 0.0)) throw std::domain_error("k_closed_form: alpha must be >= 0");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return 1.0;
    // Divide through by e^alpha to stay finite for large alpha.
    return z / (z + (1.0 - z) * std::exp(-alpha));
}

DynamicsSummary DynamicsSummary::from_counts(std::size_t n_predictors, double alpha,
                                             std::vector<std::uint64_t> counts) {
    if (n_predictors < 2) throw std::invalid_argument("DynamicsSummary: need M >= 2");
    if (!(alpha >= 0.0)) throw std::invalid_argument("DynamicsSummary: alpha must be >= 0");
    if (counts.size() != n_predictors + 1) throw std::invalid_argument("DynamicsSummary: need M + 1 counts");
    DynamicsSummary s;
    s.m_ = n_predictors;
    s.alpha_ = alpha;
    s.counts_ = std::move(counts);
    __int128 n = 0;
    __int128 s1 = 0;
    __int128 s2 = 0;
    for (std::size_t k = 0; k < s.counts_.size(); ++k) {
        const __int128 c = s.counts_[k];
        const __int128 kk = static_cast<__int128>(k);
        n += c;
        s1 += c * kk;
        s2 += c * kk * kk;
    }
    if (n == 0) throw std::invalid_argument("DynamicsSummary: empty distribution");
    s.n_ = static_cast<std::uint64_t>(n);
    const long double m = static_cast<long double>(n_predictors);
    const long double nn = static_cast<long double>(n);
    s.mu_ = static_cast<double>(static_cast<long double>(s1) / (m * nn));
    // Var = (n S2 - S1^2) / (M^2 n^2); the numerator is an exact integer.
    const __int128 num = n * s2 - s1 * s1;
    s.var_ = static_cast<double>(static_cast<long double>(num) / (m * m * nn * nn));
    return s;
}

DynamicsSummary DynamicsSummary::from_samples(std::size_t n_predictors, double alpha, std::span<const double> z) {
    std::vector<std::uint64_t> counts(n_predictors + 1, 0);
    const double m = static_cast<double>(n_predictors);
    for (double v : z) {
        const double scaled = v * m;
        const double k = std::round(scaled);
        if (!(k >= 0.0 && k <= m) || std::abs(scaled - k) > 1e-9) {
            throw std::invalid_argument("DynamicsSummary: sample is not a multiple of 1/M in [0, 1]");
        }
        ++counts[static_cast<std::size_t>(k)];
    }
    return from_counts(n_predictors, alpha, std::move(counts));
}

std::vector<double> DynamicsSummary::z_samples() const {
    std::vector<double> out;
    out.reserve(n_);
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        out.insert(out.end(), counts_[k], static_cast<double>(k) / static_cast<double>(m_));
    }
    return out;
}

double qoe_from_lemma(const DynamicsSummary& s) {
    long double acc = 0.0;
    const double m = static_cast<double>(s.n_predictors());
    for (std::size_t k = 0; k < s.counts().size(); ++k) {
        if (s.counts()[k] == 0) continue;
        acc += static_cast<long double>(s.counts()[k]) * k_closed_form(static_cast<double>(k) / m, s.alpha());
    }
    return static_cast<double>(acc / static_cast<long double>(s.n_samples()));
}

double qoe_brute_force(const DynamicsSummary& s) {
    long double acc = 0.0;
    const std::size_t m = s.n_predictors();
    for (std::size_t k = 0; k < s.counts().size(); ++k) {
        if (s.counts()[k] == 0) continue;
        std::vector<double> q(m, 0.0);
        std::fill(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(k), 1.0);
        const auto p = selection_probabilities(q, s.alpha());
        double e = 0.0;
        for (std::size_t j = 0; j < m; ++j) e += p[j] * q[j];
        acc += static_cast<long double>(s.counts()[k]) * e;
    }
    return static_cast<double>(acc / static_cast<long double>(s.n_samples()));
}

QoeBounds theorem3_bounds(std::span<const double> qualities, std::size_t n_predictors, double alpha) {
    if (n_predictors == 0 || qualities.size() % n_predictors != 0 || qualities.empty()) {
        throw std::invalid_argument("theorem3_bounds: qualities must be a non-empty points x M table");
    }
    const std::size_t n = qualities.size() / n_predictors;
    QoeBounds b;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = qualities.subspan(i * n_predictors, n_predictors);
        double sum = 0.0;
        double mx = 0.0;
        for (double v : row) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error("theorem3_bounds: qualities must be >= 0");
            sum += v;
            mx = std::max(mx, v);
        }
        const auto p = selection_probabilities(row, alpha);
        double e = 0.0;
        for (std::size_t j = 0; j < n_predictors; ++j) e += p[j] * row[j];
        b.lower += sum / static_cast<double>(n_predictors);
        b.value += e;
        b.upper += mx;
    }
    b.lower /= static_cast<double>(n);
    b.value /= static_cast<double>(n);
    b.upper /= static_cast<double>(n);
    return b;
}

TheoremOneConstants theorem1_constants(std::size_t n_predictors, double alpha, double mu1, double mu2) {
    if (n_predictors < 2) throw std::invalid_argument("theorem1_constants: need M >= 2");
    if (!(alpha > 0.0)) throw std::invalid_argument("theorem1_constants: alpha must be > 0");
    if (!(mu1 > 0.0 && mu1 < 1.0) || !(mu2 > 0.0 && mu2 < 1.0)) {
        throw std::domain_error("theorem1_constants: means must lie strictly inside (0, 1)");
    }
    const double m = static_cast<double>(n_predictors);
    const double ea = std::exp(alpha);
    const double em1 = std::expm1(alpha);
    TheoremOneConstants c;
    c.c_low = m * em1 / ((m - 1.0) * ea + 1.0);
    c.c_upp = m * em1 / (ea + m - 1.0);
    c.c1 = (ea + m - 1.0) / ((m - 1.0) * ea + 1.0);
    const double a1 = mu1 * (1.0 - mu1);
    const double a2 = mu2 * (1.0 - mu2);
    c.c2 = -c.c1 * a1 + (mu2 - mu1) / c.c_upp + a2;
    const double num = (m - 1.0) * a1 - a2;
    const double den = (m - 1.0) * a2 - a1;
    // The threshold solves e^alpha * den >= num. With den == 0 it holds for
    // every alpha iff num <= 0; with den < 0 it only bounds alpha from above.
    if (den == 0.0 && num <= 0.0) {
        c.c_alpha = 0.0;
    } else if (den <= 0.0) {
        c.c_alpha = std::numeric_limits<double>::infinity();
    } else if (num / den <= 1.0) {
        c.c_alpha = 0.0;
    } else {
        c.c_alpha = std::log(num / den);
    }
    return c;
}

TheoremOneVerdict theorem1_condition(const DynamicsSummary& s1, const DynamicsSummary& s2) {
    if (s1.n_predictors() != s2.n_predictors()) throw std::invalid_argument("theorem1_condition: M differs");
    if (s1.alpha() != s2.alpha()) throw std::invalid_argument("theorem1_condition: alpha differs");
    if (s2.mu() < s1.mu()) {
        throw std::invalid_argument("theorem1_condition: expects mu(s2) >= mu(s1); swap the arguments");
    }
    TheoremOneVerdict v;
    v.constants = theorem1_constants(s1.n_predictors(), s1.alpha(), s1.mu(), s2.mu());
    v.alpha_condition = s1.alpha() >= v.constants.c_alpha;
    v.statement_condition = v.alpha_condition && s2.var() >= v.constants.c1 * s1.var();
    v.proof_condition = s2.var() >= v.constants.c1 * s1.var() + v.constants.c2;
    v.verdict = v.alpha_condition && v.proof_condition;
    v.qoe1 = qoe_from_lemma(s1);
    v.qoe2 = qoe_from_lemma(s2);
    return v;
}

std::vector<std::uint64_t> random_lattice_counts(std::size_t n_predictors, std::uint64_t max_count,
                                                 std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint64_t> counts(n_predictors + 1, 0);
    // Keep probability varies per draw so both spread-out and concentrated
    // distributions appear.
    const double keep = uniform_real(rng, 0.15, 1.0);
    for (auto& c : counts) {
        if (uniform01(rng) < keep) c = uniform_index(rng, max_count + 1);
    }
    if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; })) {
        counts[uniform_index(rng, counts.size())] = 1;
    }
    return counts;
}

SoundnessReport theorem1_soundness_sweep(std::size_t n_predictors, std::uint64_t pairs, std::uint64_t seed) {
    SoundnessReport r;
    r.n_predictors = n_predictors;
    Rng rng(seed);
    std::uint64_t draw = 0;
    while (r.pairs < pairs) {
        const double alpha = uniform_real(rng, 0.05, 8.0);
        auto a = DynamicsSummary::from_counts(n_predictors, alpha, random_lattice_counts(n_predictors, 20, derive_seed(seed, {draw++})));
        auto b = DynamicsSummary::from_counts(n_predictors, alpha, random_lattice_counts(n_predictors, 20, derive_seed(seed, {draw++})));
        const auto interior = [](const DynamicsSummary& s) { return s.mu() > 0.0 && s.mu() < 1.0; };
        if (!interior(a) || !interior(b)) continue;
        if (b.mu() < a.mu()) std::swap(a, b);
        const auto v = theorem1_condition(a, b);
        const double q1 = qoe_brute_force(a);
        const double q2 = qoe_brute_force(b);
        ++r.pairs;
        r.statement_true += v.statement_condition ? 1 : 0;
        if (v.verdict) {
            ++r.verdict_true;
            if (q2 > q1 + 1e-12) ++r.violations;
        } else if (q2 <= q1) {
            ++r.false_with_decrease;
        } else {
            ++r.false_with_increase;
        }
    }
    return r;
}

std::string theory_report_json(const DynamicsSummary& s1, const DynamicsSummary& s2) {
    const auto v = theorem1_condition(s1, s2);
    auto summary = [](const DynamicsSummary& s) {
        nlohmann::ordered_json j;
        j["counts"] = s.counts();
        j["mu"] = s.mu();
        j["var"] = s.var();
        j["qoe_closed_form"] = qoe_from_lemma(s);
        j["qoe_brute_force"] = qoe_brute_force(s);
        return j;
    };
    nlohmann::ordered_json j;
    j["n_predictors"] = s1.n_predictors();
    j["alpha"] = s1.alpha();
    j["dynamics_1"] = summary(s1);
    j["dynamics_2"] = summary(s2);
    nlohmann::ordered_json c;
    c["c_low"] = v.constants.c_low;
    c["c_upp"] = v.constants.c_upp;
    c["c1"] = v.constants.c1;
    c["c2"] = v.constants.c2;
    if (std::isinf(v.constants.c_alpha)) {
        c["c_alpha"] = "inf";
    } else {
        c["c_alpha"] = v.constants.c_alpha;
    }
    j["constants"] = c;
    j["alpha_condition"] = v.alpha_condition;
    j["statement_condition"] = v.statement_condition;
    j["proof_condition"] = v.proof_condition;
    j["verdict"] = v.verdict;
    j["qoe_decreases"] = v.qoe2 <= v.qoe1;
    return j.dump(2);
}

}  // namespace mlcomp
