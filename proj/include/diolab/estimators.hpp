#pragma once

#include "diolab/dimfun.hpp"
#include "diolab/geometry.hpp"
#include "diolab/problems.hpp"
#include "diolab/series.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace diolab {

using AnyProblem = std::variant<LinearFormsProblem, SquaresProblem>;

int ambient_dim(const AnyProblem& p);
bool out_of_theorem(const AnyProblem& p);

struct Window {
    std::int64_t lo;  // inclusive
    std::int64_t hi;  // inclusive
};

// [2^k, 2^{k+1} - 1] for k = a..b
std::vector<Window> dyadic_windows(int a, int b);
// [1, 2^k] for k = a..b
std::vector<Window> cumulative_windows(int a, int b);

// All heights |a| in [lo, hi] of vectors hitting X (sorted, with repeats removed).
// first_only returns just the smallest one.
std::vector<std::int64_t> hit_heights(const AnyProblem& p, const std::vector<double>& x, std::int64_t lo,
                                      std::int64_t hi, bool first_only = false);
bool hits_window(const AnyProblem& p, const std::vector<double>& x, const Window& w);

struct WilsonInterval {
    double lo, hi;
};
WilsonInterval wilson95(std::int64_t hits, std::int64_t samples);

struct MCMeasureReport {
    Window window{1, 1};
    std::int64_t samples = 0;
    std::int64_t hits = 0;
    double fraction = 0.0;
    WilsonInterval wilson_ci{0.0, 0.0};
    std::uint64_t seed = 0;
    bool out_of_theorem = false;

    double half_width() const { return 0.5 * (wilson_ci.hi - wilson_ci.lo); }
};

MCMeasureReport mc_measure(const AnyProblem& p, std::int64_t H1, std::int64_t H2, std::int64_t samples,
                           std::uint64_t seed, int threads = 0);

// one pass over the samples for several windows; reports in window order
std::vector<MCMeasureReport> mc_measure_windows(const AnyProblem& p, const std::vector<Window>& windows,
                                                std::int64_t samples, std::uint64_t seed, int threads = 0);

// sum over the window of the one-vector measure bound: (2 Psi)^m, or 2 psi(|a|)/a.a for squares
double union_bound(const AnyProblem& p, const Window& w);

struct ZeroOneReport {
    enum class Trend { TowardOne, TowardZero, Inconclusive };
    Trend trend = Trend::Inconclusive;
    std::vector<MCMeasureReport> cumulative;  // [1, hi_k]
    std::vector<MCMeasureReport> windows;     // [lo_k, hi_k]
    std::vector<double> union_bounds;
    bool union_bound_holds = true;
    bool window_fractions_decrease = true;
    Classification series;
    std::string note;
};
std::string to_string(ZeroOneReport::Trend t);

ZeroOneReport zero_one_probe(const AnyProblem& p, const std::vector<Window>& schedule, std::int64_t samples,
                             std::uint64_t seed, int threads = 0);

// Planar occupancy grid at 2^level cells per side.
struct Bitmap {
    int level = 0;
    std::int64_t side = 1;
    std::vector<std::uint64_t> words;

    explicit Bitmap(int lvl = 0);
    bool get(std::int64_t i, std::int64_t j) const;
    void set(std::int64_t i, std::int64_t j);
    void set_run(std::int64_t i, std::int64_t j0, std::int64_t j1);  // column i, rows j0..j1
    std::int64_t count() const;
    Bitmap coarsen() const;  // OR over 2x2 blocks
    void and_with(const Bitmap& o);
};

class SetOracle {
public:
    virtual ~SetOracle() = default;
    virtual int dim() const = 0;
    virtual bool contains(const std::vector<double>& x) const = 0;
    // exact box occupancy at 2^level (cells meeting the set); false if unsupported
    virtual bool raster(int level, Bitmap& out) const {
        (void)level;
        (void)out;
        return false;
    }
};

// X in G_K iff every window k <= K has some a hitting X
class GenerationSet : public SetOracle {
public:
    GenerationSet(AnyProblem p, std::vector<Window> schedule);

    int dim() const override;
    bool contains(const std::vector<double>& x) const override;
    bool raster(int level, Bitmap& out) const override;

    const std::vector<Window>& windows() const { return windows_; }
    const AnyProblem& problem() const { return problem_; }
    // exact raster of the union over a single window
    Bitmap window_raster(const Window& w, int level) const;

private:
    AnyProblem problem_;
    std::vector<Window> windows_;
};

GenerationSet generation_set(const AnyProblem& p, int K, const std::vector<Window>& schedule);

struct Box {
    std::vector<double> lo, hi;  // closed box
};

class BoxUnionSet : public SetOracle {
public:
    explicit BoxUnionSet(int dim, std::vector<Box> boxes = {});
    int dim() const override { return dim_; }
    bool contains(const std::vector<double>& x) const override;
    bool raster(int level, Bitmap& out) const override;
    const std::vector<Box>& boxes() const { return boxes_; }

private:
    int dim_;
    std::vector<Box> boxes_;
};

struct BoxSampling {
    enum class Mode { Exact, CenterProbe, Subgrid };
    Mode mode = Mode::Exact;
    int subgrid = 3;
    int base_level = 13;  // Exact: resolution of the per-generation raster
};

struct BoxCountReport {
    std::vector<Window> generations;
    std::vector<int> levels;
    std::vector<double> scales;  // 2^-level
    std::vector<std::int64_t> counts;
    double slope = 0.0;
    double residual = 0.0;
    std::pair<std::size_t, std::size_t> fit_range{0, 0};  // inclusive indices
    std::vector<double> local_slopes;
    std::string sampling;
    std::string note;
};

// levels: box side 2^-level; fit over fit_range (defaults to all)
BoxCountReport box_count(const SetOracle& set, const std::vector<int>& levels, const BoxSampling& sampling = {},
                         std::pair<std::size_t, std::size_t> fit_range = {0, 0});

struct ContentReport {
    DimensionFunction f = DimensionFunction::power(1.0);
    double rho = 0.0;
    std::int64_t boxes = 0;
    double radius = 0.0;
    Norm norm = Norm::Supremum;
    double value = 0.0;
};

ContentReport content_upper_bound(const SetOracle& set, const DimensionFunction& f, int level,
                                  Norm norm = Norm::Supremum, const BoxSampling& sampling = {});
ContentReport content_from_count(std::int64_t boxes, int dim, const DimensionFunction& f, int level, Norm norm);

std::string to_string(const BoxSampling& s);

}  // namespace diolab
