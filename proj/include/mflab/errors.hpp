#ifndef MFLAB_ERRORS_HPP
#define MFLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mflab {

// Resource guard exceeded (state-space or marginal dimension caps).
// The CLI maps this to its own exit code so refusals are distinguishable
// from config errors.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A runtime sanity invariant failed (norm drift beyond bound, non-Hermitian
// marginal, ...). Indicates a bug or a numerically hopeless configuration.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mflab

#endif
