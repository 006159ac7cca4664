#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diolab {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NotADimensionFunction : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Norm { Euclidean, Supremum };

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
    Norm norm = Norm::Supremum;
};

// f in the closed algebra: r^s, r^s (log 1/r)^k, or a monotone table.
// Tables carry an extra power r^shift so that quotients of tables stay exact.
class DimensionFunction {
public:
    enum class Kind { PowerLaw, PowerLogLaw, Tabulated };

    static DimensionFunction power(double s);
    static DimensionFunction power_log(double s, double k);
    static DimensionFunction tabulated(std::vector<std::pair<double, double>> samples,
                                       double decay_threshold = 1e-6);

    Kind kind() const { return kind_; }
    double s() const { return s_; }
    double k() const { return k_; }
    double shift() const { return shift_; }
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }
    const std::string& source() const { return source_; }

    double domain_max() const;
    double operator()(double r) const;

    // true only for PowerLaw with s exactly equal to m
    bool is_power(double exponent) const { return kind_ == Kind::PowerLaw && s_ == exponent; }

    void set_source(std::string src) { source_ = std::move(src); }

private:
    Kind kind_ = Kind::PowerLaw;
    double s_ = 1.0;
    double k_ = 0.0;
    double shift_ = 0.0;
    double decay_threshold_ = 1e-6;
    std::vector<std::pair<double, double>> samples_;
    std::string source_;

    friend DimensionFunction derive_quotient(const DimensionFunction&, int);
};

double eval(const DimensionFunction& f, double r);

DimensionFunction derive_quotient(const DimensionFunction& f, int l);

enum class Monotonicity { NonIncreasing, NonDecreasing, NotMonotone };

// r -> r^{-k} f(r)
Monotonicity check_monotone_ratio(const DimensionFunction& f, int k, int grid = 100);

Ball ball_transform(const Ball& b, const DimensionFunction& f, int m);

// smallest r with f(r) = v; throws when f is not invertible at v
double invert(const DimensionFunction& f, double v);

// limit of f(r)/g(r) as r -> 0 for law kinds
enum class RatioLimit { Zero, Finite, Infinite };
RatioLimit ratio_limit(const DimensionFunction& f, const DimensionFunction& g);

DimensionFunction parse_dimfun(const std::string& text);
std::string to_string(const DimensionFunction& f);
std::string to_string(Monotonicity m);

std::string fmt_double(double x);

}  // namespace diolab
