#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlcomp {

/// k(z, alpha) = z e^alpha / (z e^alpha + 1 - z): the expected quality of the
/// selected predictor when a fraction z of the market is correct.
double k_closed_form(double z, double alpha);

/// Distribution of the average correctness Z over the lattice {0, 1/M, ..., 1},
/// held as integer counts so mean and variance are exact rationals.
class DynamicsSummary {
public:
    /// counts[k] = number of users with exactly k correct predictors (size M + 1).
    static DynamicsSummary from_counts(std::size_t n_predictors, double alpha, std::vector<std::uint64_t> counts);

    /// Snaps each sample to the nearest lattice point; throws if any sample
    /// is more than 1e-9 away from a multiple of 1/M.
    static DynamicsSummary from_samples(std::size_t n_predictors, double alpha, std::span<const double> z);

    std::size_t n_predictors() const { return m_; }
    double alpha() const { return alpha_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t n_samples() const { return n_; }
    double mu() const { return mu_; }
    double var() const { return var_; }  // population variance E[Z^2] - E[Z]^2

    std::vector<double> z_samples() const;

private:
    DynamicsSummary() = default;

    std::size_t m_ = 0;
    double alpha_ = 0.0;
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_ = 0;
    double mu_ = 0.0;
    double var_ = 0.0;
};

/// Mean of k(Z, alpha) over the summary.
double qoe_from_lemma(const DynamicsSummary& s);

/// Mean over lattice points of sum_j p_j(alpha) q_j evaluated directly on a
/// correctness vector with k ones, using the softmax selection rule.
double qoe_brute_force(const DynamicsSummary& s);

struct QoeBounds {
    double lower = 0.0;  // mean of per-point averages
    double value = 0.0;  // mean of sum_j p_j(alpha) q_j
    double upper = 0.0;  // mean of per-point maxima
};

/// qualities is row-major (points x n_predictors), entries >= 0.
QoeBounds theorem3_bounds(std::span<const double> qualities, std::size_t n_predictors, double alpha);

struct TheoremOneConstants {
    double c_low = 0.0;
    double c_upp = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c_alpha = 0.0;  // +infinity when no finite threshold exists
};

/// Constants of the variance-comparison condition. Requires M >= 2,
/// alpha > 0 and both means strictly inside (0, 1).
TheoremOneConstants theorem1_constants(std::size_t n_predictors, double alpha, double mu1, double mu2);

struct TheoremOneVerdict {
    TheoremOneConstants constants;
    bool alpha_condition = false;      // alpha >= c_alpha
    bool statement_condition = false;  // alpha >= c_alpha and Var2 >= c1 Var1
    bool proof_condition = false;      // Var2 >= c1 Var1 + c2
    bool verdict = false;              // alpha_condition and proof_condition
    double qoe1 = 0.0;
    double qoe2 = 0.0;
};

/// Sufficient condition for qoe(s2) <= qoe(s1) given mu(s2) >= mu(s1).
TheoremOneVerdict theorem1_condition(const DynamicsSummary& s1, const DynamicsSummary& s2);

struct SoundnessReport {
    std::size_t n_predictors = 0;
    std::uint64_t pairs = 0;
    std::uint64_t verdict_true = 0;
    std::uint64_t statement_true = 0;
    std::uint64_t violations = 0;  // verdict true but qoe2 > qoe1 + 1e-12
    std::uint64_t false_with_decrease = 0;
    std::uint64_t false_with_increase = 0;
};

/// Random lattice distribution: each of the M + 1 points gets a count in
/// [0, max_count], with points dropped at random to produce sparse support.
std::vector<std::uint64_t> random_lattice_counts(std::size_t n_predictors, std::uint64_t max_count,
                                                 std::uint64_t seed);

/// Random (s1, s2) pairs ordered so mu2 >= mu1; pairs with a mean at 0 or 1
/// are redrawn. qoe values come from qoe_brute_force.
SoundnessReport theorem1_soundness_sweep(std::size_t n_predictors, std::uint64_t pairs, std::uint64_t seed);

/// Machine-readable verdict for a pair of dynamics: constants, both forms of
/// the condition, closed-form and brute-force QoE values.
std::string theory_report_json(const DynamicsSummary& s1, const DynamicsSummary& s2);

}  // namespace mlcomp
