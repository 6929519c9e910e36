#include "hdsurr/common.hpp"

#include "hdsurr/errors.hpp"

#include <chrono>

namespace hdsurr {

double relative_l2(const Vector& pred, const Vector& ref) {
    if (pred.size() != ref.size()) throw ArgumentError("relative_l2: size mismatch");
    const double den = ref.norm();
    const double num = (pred - ref).norm();
    return den > 0.0 ? num / den : num;
}

namespace {
std::int64_t now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}
}  // namespace

Stopwatch::Stopwatch() : start_ns_(now_ns()) {}

double Stopwatch::seconds() const { return static_cast<double>(now_ns() - start_ns_) * 1e-9; }

}  // namespace hdsurr
