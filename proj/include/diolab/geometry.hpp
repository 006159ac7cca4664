#pragma once

#include "diolab/problems.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace diolab {

// X in I^{n x m}; column j holds the variables of the j-th form.
struct Point {
    int n = 1;
    int m = 1;
    std::vector<double> x;  // x[j * n + i]

    Point() = default;
    Point(int n_, int m_) : n(n_), m(m_), x(std::size_t(n_) * m_, 0.0) {}
    Point(int n_, int m_, std::vector<double> v);

    double& at(int i, int j) { return x[std::size_t(j) * n + i]; }
    double at(int i, int j) const { return x[std::size_t(j) * n + i]; }
};

// distance to the nearest integer
inline double dist_nearest_int(double t) { return std::abs(t - std::nearbyint(t)); }

struct ResonantPlane {
    enum class Kind { Linear, Squared };
    IVec a;
    IVec p;
    std::vector<double> b;
    Kind kind = Kind::Linear;

    // effective coefficient vector and right-hand side value for form j
    std::vector<double> coeffs() const;
    double value(int j) const;
    void validate() const;
};

struct Neighborhood {
    ResonantPlane plane;
    double delta = 0.0;
};

// max_j ||a.x_j - b_j|| for the linear forms
double form_residual(const Point& X, const IVec& a, const std::vector<double>& b);

bool satisfies(const Point& X, const IVec& a, const LinearFormsProblem& p);

bool neighborhood_membership(const Point& X, const Neighborhood& nb);

struct ShiftRange {
    // per form j, integers p_j in [lo, hi]; empty when lo > hi
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    double certified_constant = 0.0;  // C_shift, count <= C_shift |a|^m

    std::int64_t count() const;
    void for_each(const std::function<void(const IVec&)>& fn) const;
};

ShiftRange relevant_shifts(const IVec& a, const std::vector<double>& b, double delta);
double shift_constant(int n, int m);

// Checks satisfies <=> exists p with neighborhood membership for every 0 < |a| <= H.
bool equivalence_check(const Point& X, const LinearFormsProblem& p, std::int64_t H);

std::vector<IVec> hit_list(const Point& X, const LinearFormsProblem& p, std::int64_t H1, std::int64_t H2,
                           int threads = 0);

struct CoverReport {
    std::int64_t count = 0;       // product of per-form counts
    double bound = 0.0;           // C_geom (|a|/Psi)^{(n-1)m}, when r = Psi/|a|
    double certified_constant = 0.0;
    bool within_bound = true;
    double r = 0.0;
    // grid cells (pitch r, sup-norm ball of radius r around each centre) per form
    std::vector<std::vector<IVec>> cells;
    bool single_ball = false;  // n = 1: the neighbourhood is itself one ball
    std::vector<double> ball_center;
};

// keep_cells: store per-form cell lists (needed for soundness probes)
CoverReport cover_neighborhood(const Neighborhood& nb, double r, bool keep_cells = false);
double cover_constant(int n, int m);
// does the constructed cover contain X
bool cover_contains(const CoverReport& cover, const Neighborhood& nb, const Point& X);

// Independent count of grid cells (pitch r) meeting each slab, by scanning every cell.
std::int64_t brute_force_cover_count(const Neighborhood& nb, double r);

}  // namespace diolab
