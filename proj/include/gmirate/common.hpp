#ifndef GMIRATE_COMMON_HPP
#define GMIRATE_COMMON_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gmirate {

// Thrown when a model or plan parameter violates its contract.
class model_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a computation cannot deliver its declared accuracy
// (quadrature refinement disagreement, singular solve, cell underflow).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kInv2Pi = 0.15915494309189533577;
inline constexpr double kLn2 = 0.69314718055994530942;

inline double infinity() { return std::numeric_limits<double>::infinity(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw model_error(msg);
}

}  // namespace gmirate

#endif
