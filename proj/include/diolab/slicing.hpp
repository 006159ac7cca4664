#pragma once

#include "diolab/dimfun.hpp"
#include "diolab/estimators.hpp"
#include "diolab/geometry.hpp"
#include "diolab/problems.hpp"
#include "diolab/series.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace diolab {

// Slice V + X0 of I^{nm}: V varies the first coordinate of every form,
// x0 fixes the rest. x0[j * (n - 1) + (i - 1)] holds x_{j,i+1} (0-based i).
struct SliceSpec {
    LinearFormsProblem problem;
    std::vector<double> x0;

    void validate() const;
    // b_j - (a_2 x_{j,2} + ... + a_n x_{j,n})
    double beta(const IVec& a, int j) const;
    // the point of the slice whose first coordinates are y
    Point embed(const std::vector<double>& y) const;
};

struct SliceBall {
    std::vector<double> center;  // in I^m, reduced mod 1
    double radius = 0.0;
    IVec a;
    IVec p;
};

struct SliceBallFamily {
    int m = 1;
    bool torus = true;
    std::vector<SliceBall> balls;
};

// center of the slice ball for (a, p) in form j
double slice_center(const SliceSpec& s, const IVec& a, std::int64_t p_j, int j);

// every a in Z_1 with H1 <= |a| <= H2 and Psi(a) > 0, p_j running over 0..|a_1|-1
SliceBallFamily slice_balls(const SliceSpec& s, std::int64_t H1, std::int64_t H2);

// is y inside a ball of the family (sup norm on the torus)
bool family_contains(const SliceBallFamily& fam, const std::vector<double>& y);

enum class FamilyTransform { Inflate, Deflate };

// r -> g(r)^{1/m}
double inflate_radius(double r, const DimensionFunction& g, int m);
// r -> g^{-1}(r^m)
double deflate_radius(double r, const DimensionFunction& g, int m);

SliceBallFamily transform_family(const SliceBallFamily& fam, const DimensionFunction& g, int m,
                                 FamilyTransform direction);
SliceBallFamily shrink_family(const SliceBallFamily& fam, double delta);

// Psi~(a) with Psi~^m = g(Psi/|a|) |a|^m, kept in extended precision so that
// dividing by |a| returns inflate_radius(Psi/|a|) exactly for |a| < 2^11.
long double psi_tilde(double psi, std::int64_t height, const DimensionFunction& g, int m);

struct SliceMeasure {
    double fraction = 0.0;
    bool exact = false;
    std::int64_t samples = 0;
    std::int64_t hits = 0;
    WilsonInterval ci{0.0, 0.0};
    std::uint64_t seed = 0;
};

SliceMeasure slice_measure_probe(const SliceBallFamily& fam, std::int64_t samples, std::uint64_t seed);

// arcs [lo, hi) of R/Z, lengths >= 1 cover everything
double arc_union_length(std::vector<std::pair<double, double>> arcs);
// sum of g(len / 2) over the connected components of the union
double arc_union_content(std::vector<std::pair<double, double>> arcs, const DimensionFunction& g);

// Deterministic slices: additive recurrence with the generalized golden ratio,
// one coordinate per x_{j,i}, i >= 2.
std::vector<std::vector<double>> slice_points(int n, int m, int count);

struct SliceReport {
    std::vector<double> x0;
    bool exact = true;                      // m = 1 interval arithmetic, otherwise MC
    std::vector<double> cumulative_union;   // Psi~ family over windows 0..k
    std::vector<WilsonInterval> union_ci;   // MC only
    double tail_union = 0.0;                // Psi~ family over the last tail windows
    std::vector<double> deflated_union;     // Psi family over windows 0..k
    std::vector<double> deflated_content;   // g-content of the Psi family over windows 0..k
    std::int64_t balls = 0;                 // slice balls in the schedule
    bool content_increasing = false;        // strictly, over the last tail windows
};

struct SlicePipelineOptions {
    std::int64_t samples = 20000;  // MC samples per window when m >= 2
    std::uint64_t seed = 0;
    int tail_windows = 4;
    double full_threshold = 0.95;
    int threads = 0;
    std::int64_t wide_budget = 4000000;  // arcs merged by a plain sort before the bucketed sweep takes over
};

struct SlicePipelineReport {
    DimensionFunction f = DimensionFunction::power(1.0);
    DimensionFunction g = DimensionFunction::power(1.0);
    std::vector<Window> windows;
    std::vector<SliceReport> slices;
    bool collapse = false;            // f = r^{nm}: Psi~ = Psi
    std::string psi_tilde_law;        // closed form when available
    bool series_available = false;
    Classification psi_tilde_series;  // Schmidt sum of Psi~ restricted to Z_1
    int slices_full = 0;              // final cumulative union above full_threshold
    int slices_content_increasing = 0;
    double max_tail_union = 0.0;
    std::string note;
};

SlicePipelineReport slice_to_hausdorff_pipeline(const LinearFormsProblem& p, const DimensionFunction& f,
                                                const std::vector<std::vector<double>>& slices,
                                                const std::vector<Window>& windows,
                                                const SlicePipelineOptions& opt = {});

// Several dimension functions over the same slices share one sweep per slice.
std::vector<SlicePipelineReport> slice_to_hausdorff_pipelines(const LinearFormsProblem& p,
                                                              const std::vector<DimensionFunction>& fs,
                                                              const std::vector<std::vector<double>>& slices,
                                                              const std::vector<Window>& windows,
                                                              const SlicePipelineOptions& opt = {});

// Finite union of closed axis-aligned boxes in R^k.
struct ProductSet {
    int k = 2;
    std::vector<Box> boxes;
};

struct SlicingCheck {
    double lhs_upper = 0.0;  // upper bound for the integral of H^g over slices
    double rhs_lower = 0.0;  // lower bound for alpha(l) 2^l H^f(A)
    bool holds = false;
    bool abstained = false;
    int level = 0;
    std::string note;
};

struct SlicingCheckOptions {
    int level = 10;  // grid pitch 2^-level
    double tol = 1e-9;
};

SlicingCheck slicing_inequality_check(const ProductSet& A, const DimensionFunction& f, int l,
                                      const SlicingCheckOptions& opt = {});

namespace detail {
// Exact cumulative union lengths of the g-inflated family (m = 1) and, optionally,
// the deflated g-contents; budget selects how many arcs bypass the bucketed sweep.
std::vector<double> slice_union_profile(const SliceSpec& s, const std::vector<Window>& windows,
                                        const DimensionFunction& g, std::int64_t budget,
                                        std::vector<double>* deflated_content = nullptr);
}  // namespace detail

// volume of the Euclidean unit ball in R^l
double unit_ball_volume(int l);

}  // namespace diolab
