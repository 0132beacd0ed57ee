#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace mlcomp {

/// Non-negative similarity between a true label and a prediction.
class QualityFunction {
public:
    using Evaluator = std::function<double(std::size_t label, std::size_t prediction)>;

    /// 1 if prediction == label, else 0.
    static QualityFunction correctness();
    static QualityFunction custom(std::string name, Evaluator fn);

    /// Throws std::domain_error if a custom evaluator returns a negative or
    /// non-finite value.
    double operator()(std::size_t label, std::size_t prediction) const;

    bool is_correctness() const { return !fn_; }
    const std::string& name() const { return name_; }

private:
    QualityFunction(std::string name, Evaluator fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    std::string name_;
    Evaluator fn_;
};

}  // namespace mlcomp
