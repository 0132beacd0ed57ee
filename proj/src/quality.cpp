#include "mlcomp/quality.hpp"

#include <cmath>
#include <stdexcept>

namespace mlcomp {

QualityFunction QualityFunction::correctness() {
    return QualityFunction("correctness", {});
}

QualityFunction QualityFunction::custom(std::string name, Evaluator fn) {
    if (!fn) throw std::invalid_argument("QualityFunction::custom: empty evaluator");
    return QualityFunction(std::move(name), std::move(fn));
}

double QualityFunction::operator()(std::size_t label, std::size_t prediction) const {
    if (!fn_) return label == prediction ? 1.0 : 0.0;
    const double v = fn_(label, prediction);
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::domain_error("QualityFunction '" + name_ + "' returned a negative or non-finite value");
    }
    return v;
}

}  // namespace mlcomp
