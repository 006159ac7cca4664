#pragma once

#include "diolab/dimfun.hpp"
#include "diolab/problems.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace diolab {

// Neumaier's variant of compensated summation.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct PartialSumSeries {
    std::vector<std::int64_t> heights;
    std::vector<double> sums;
    // sum over (heights[k-1], heights[k]] accumulated on its own; optional,
    // differences of sums stand in when empty
    std::vector<double> increments;
    std::string label;
};

// heights 1, 2, 4, ... up to H, with H appended when it is not a power of two
std::vector<std::int64_t> dyadic_checkpoints(std::int64_t H);

PartialSumSeries schmidt_sum(const LinearFormsProblem& p, std::int64_t H, int threads = 0);
PartialSumSeries hausdorff_sum(const LinearFormsProblem& p, const DimensionFunction& f, std::int64_t H,
                               int threads = 0);
PartialSumSeries squares_sum(const SquaresProblem& sp, const DimensionFunction& f, std::int64_t H);
// sum of Psi(a)^{s-(n-1)m} |a|^{nm-s}
PartialSumSeries corollary_one_sum(const LinearFormsProblem& p, double s, std::int64_t H, int threads = 0);
// sum of psi(h)^{s-1} h^{4-2s}
PartialSumSeries squares_corollary_sum(const SquaresProblem& sp, double s, std::int64_t H);

// Per-window sums of Psi(a)^m for |a| in [lo, hi), used by the union bound.
double schmidt_window(const LinearFormsProblem& p, std::int64_t lo, std::int64_t hi);

struct Classification {
    enum class Verdict { Converges, Diverges, Inconclusive };
    Verdict verdict = Verdict::Inconclusive;
    double limit = 0.0;   // Converges
    double error = 0.0;   // half-width of the limit estimate
    double beta = 0.0;    // fitted log-slope of the window increments
    double beta_se = 0.0;
    double gamma = 0.0;   // log-log coefficient of the three-term fit
    std::string note;
};

std::string to_string(Classification::Verdict v);

struct ClassifyOptions {
    double eps_div = 0.05;
    double max_residual = 0.25;
};

Classification classify(const PartialSumSeries& series, const ClassifyOptions& opt = {});

struct ExponentResult {
    enum class Method { Analytic, NumericBisection };
    double s_star = 0.0;
    Method method = Method::Analytic;
    double lo = 0.0;
    double hi = 0.0;
    bool full_dimension = false;
    bool empty_set = false;
    bool inconclusive = false;
    std::int64_t H_used = 0;
    struct Probe {
        double s;
        Classification::Verdict verdict;
        double beta;
    };
    std::vector<Probe> diagnostics;
};

ExponentResult critical_exponent_analytic(const LinearFormsProblem& p);

struct NumericExponentOptions {
    // classification threshold for probes; <= 0 ties it to tol / 4
    double eps_div = 0.0;
    int threads = 0;
};

ExponentResult critical_exponent_numeric(const LinearFormsProblem& p, double s_lo, double s_hi, double tol,
                                         std::int64_t H_max, const NumericExponentOptions& opt = {});

struct SquaresExponent {
    double s_star;
    bool full_dimension;
};
SquaresExponent squares_critical_exponent(double tau);

ExponentResult squares_exponent_numeric(const SquaresProblem& sp, double s_lo, double s_hi, double tol,
                                        std::int64_t H_max, const NumericExponentOptions& opt = {});

}  // namespace diolab
