#ifndef ISOCHRON_ERROR_HPP
#define ISOCHRON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace isochron {

/// Invalid sizes, mismatched grids, out-of-range orders and other caller errors.
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base of every failure that originates in the numerics rather than in the caller.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class singular_matrix_error : public numerical_error {
public:
    singular_matrix_error(const std::string& what, double min_det, double theta)
        : numerical_error(what), min_det_(min_det), theta_(theta)
    {
    }
    double min_det() const { return min_det_; }
    double theta() const { return theta_; }

private:
    double min_det_;
    double theta_;
};

class obstruction_error : public numerical_error {
public:
    obstruction_error(const std::string& what, double magnitude)
        : numerical_error(what), magnitude_(magnitude)
    {
    }
    double magnitude() const { return magnitude_; }

private:
    double magnitude_;
};

class resonance_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// A composition argument left the domain of validity of the outer map.
class range_error : public numerical_error {
public:
    range_error(const std::string& what, double max_value)
        : numerical_error(what), max_value_(max_value)
    {
    }
    double max_value() const { return max_value_; }

private:
    double max_value_;
};

class convergence_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

/// The regularity estimate is undefined (constant input).
class regularity_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace isochron

#endif
