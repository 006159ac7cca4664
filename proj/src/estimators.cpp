#include "diolab/estimators.hpp"

#include "diolab/parallel.hpp"
#include "diolab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diolab {

int ambient_dim(const AnyProblem& p) {
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) return lp->n * lp->m;
    return 2;
}

bool out_of_theorem(const AnyProblem& p) {
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) return !lp->in_theorem();
    return false;
}

std::vector<Window> dyadic_windows(int a, int b) {
    std::vector<Window> out;
    for (int k = a; k <= b; ++k) out.push_back({std::int64_t(1) << k, (std::int64_t(1) << (k + 1)) - 1});
    return out;
}

std::vector<Window> cumulative_windows(int a, int b) {
    std::vector<Window> out;
    for (int k = a; k <= b; ++k) out.push_back({1, std::int64_t(1) << k});
    return out;
}

namespace {

// floor through an integer conversion; std::floor is a libcall on baseline x86-64
inline double fast_floor(double t) {
    double f = double(std::int64_t(t));
    return f > t ? f - 1.0 : f;
}

double frac(double t) { return t - fast_floor(t); }

// suffix maxima of Psi over |a| >= h, h = 0..hi; bound for the bucket query
const std::vector<double>& psi_upper_table(const LinearFormsProblem& p, std::int64_t hi) {
    thread_local std::vector<double> cache;
    thread_local const void* key_table = nullptr;
    thread_local double key_tau = -1.0;
    thread_local int key_law = -1;
    const bool power = p.psi.law == PsiSpec::Law::Power;
    bool same = key_law == int(p.psi.law) && std::int64_t(cache.size()) > hi &&
                (power ? key_tau == p.psi.tau : key_table == static_cast<const void*>(&p.psi.table));
    if (same && !power) same = false;  // tables may be edited in place, rebuild
    if (same) return cache;
    cache.assign(std::size_t(hi + 1), 0.0);
    if (power) {
        for (std::int64_t h = 0; h <= hi; ++h) cache[h] = std::pow(double(std::max<std::int64_t>(h, 1)), -p.psi.tau);
    } else {
        for (auto& [a, v] : p.psi.table) {
            auto h = std::min(sup_norm(a), hi);
            cache[h] = std::max(cache[h], v);
        }
        for (std::int64_t h = hi; h-- > 0;) cache[h] = std::max(cache[h], cache[h + 1]);
    }
    key_law = int(p.psi.law);
    key_tau = p.psi.tau;
    key_table = &p.psi.table;
    return cache;
}

// Buckets of frac(a1 * x) for a1 in [-K, K], B a power of two.
struct FracIndex {
    std::int64_t K = 0;
    std::int64_t B = 1;
    std::vector<std::int32_t> start;  // CSR offsets, size B + 1
    std::vector<std::int32_t> a1;
    std::vector<double> val;

    FracIndex(double x, std::int64_t K_) : K(K_) {
        while (B < 2 * K + 1) B <<= 1;
        const std::int64_t n = 2 * K + 1;
        thread_local std::vector<std::int32_t> bk;
        thread_local std::vector<double> v;
        bk.resize(n);
        v.resize(n);
        start.assign(B + 1, 0);
        for (std::int64_t t = -K; t <= K; ++t) {
            double f = frac(double(t) * x);
            v[t + K] = f;
            bk[t + K] = std::int32_t(std::min<std::int64_t>(B - 1, std::int64_t(f * double(B))));
            ++start[bk[t + K] + 1];
        }
        for (std::int64_t i = 0; i < B; ++i) start[i + 1] += start[i];
        a1.resize(n);
        val.resize(n);
        std::vector<std::int32_t> pos(start.begin(), start.end() - 1);
        for (std::int64_t t = -K; t <= K; ++t) {
            auto at = pos[bk[t + K]]++;
            a1[at] = std::int32_t(t);
            val[at] = v[t + K];
        }
    }

    // all a1 with circular distance d of frac(a1 x) to c below r, as fn(a1, d)
    template <class Fn>
    void query(double c, double r, Fn&& fn) const {
        if (r >= 0.5) {
            for (std::int64_t i = 0; i < 2 * K + 1; ++i) {
                double d = std::abs(val[i] - c);
                fn(std::int64_t(a1[i]), std::min(d, 1.0 - d));
            }
            return;
        }
        std::int64_t b0 = std::int64_t(fast_floor((c - r) * double(B)));
        std::int64_t b1 = std::int64_t(fast_floor((c + r) * double(B)));
        if (b1 - b0 + 1 >= B) {
            b0 = 0;
            b1 = B - 1;
        }
        for (std::int64_t b = b0; b <= b1; ++b) {
            std::int64_t bb = b & (B - 1);
            for (auto i = start[bb]; i < start[bb + 1]; ++i) {
                double d = std::abs(val[i] - c);
                d = std::min(d, 1.0 - d);
                if (d < r) fn(std::int64_t(a1[i]), d);
            }
        }
    }
};

// absorbs rounding between the bucketed residual and the one satisfies() computes
constexpr double kSlack = 1e-9;

void scan_linear(const LinearFormsProblem& p, const Point& X, std::int64_t lo, std::int64_t hi,
                 std::vector<std::int64_t>& out) {
    const int n = p.n;
    if (n == 1) {
        for (std::int64_t h = std::max<std::int64_t>(lo, 1); h <= hi; ++h)
            for (std::int64_t a : {-h, h}) {
                IVec v{a};
                if (psi_value(p, v) > 0.0 && satisfies(X, v, p)) {
                    out.push_back(h);
                    break;
                }
            }
        return;
    }
    const auto& up = psi_upper_table(p, hi);
    FracIndex idx(X.at(0, 0), hi);
    IVec a(n);
    const std::int64_t floor_h = std::max<std::int64_t>(lo, 1);
    auto visit = [&](const IVec& o, std::int64_t ho, double s) {
        double r = up[std::max(ho, floor_h)];
        if (!(r > 0.0)) return;
        idx.query(frac(-s), r + kSlack, [&](std::int64_t a1, double d) {
            std::int64_t h = std::max(ho, a1 < 0 ? -a1 : a1);
            if (h < lo || h > hi || h == 0) return;
            // Psi at this height bounds the residual; satisfies() decides the rest
            if (!(d < up[h] + kSlack)) return;
            a[0] = a1;
            for (int i = 1; i < n; ++i) a[i] = o[i - 1];
            if (psi_value(p, a) > 0.0 && satisfies(X, a, p)) out.push_back(h);
        });
    };
    IVec o(n - 1, -hi);
    if (n == 2) {
        const double x1 = X.at(1, 0), b0 = p.b[0];
        for (std::int64_t t = -hi; t <= hi; ++t) {
            o[0] = t;
            visit(o, t < 0 ? -t : t, double(t) * x1 - b0);
        }
        return;
    }
    for (;;) {
        double s = -p.b[0];
        for (int i = 1; i < n; ++i) s += double(o[i - 1]) * X.at(i, 0);
        visit(o, sup_norm(o), s);
        int d = n - 2;
        while (d >= 0 && o[d] == hi) o[d--] = -hi;
        if (d < 0) break;
        ++o[d];
    }
}

bool squares_hit(const SquaresProblem& sp, double x1, double x2, std::int64_t a1, std::int64_t a2) {
    std::int64_t h = std::max(a1, a2);
    double psi = sp.psi(h);
    if (!(psi > 0.0)) return false;
    double t = double(a1 * a1) * x1 + double(a2 * a2) * x2;
    double q = std::floor(std::sqrt(t));
    for (double pp : {q - 1.0, q, q + 1.0}) {
        if (pp < 0.0) continue;
        if (std::abs(t - pp * pp) < psi) return true;
    }
    return false;
}

void scan_squares(const SquaresProblem& sp, const std::vector<double>& x, std::int64_t lo, std::int64_t hi,
                  std::vector<std::int64_t>& out) {
    // a and its sign variants give the same plane, so a1, a2 >= 0
    for (std::int64_t h = std::max<std::int64_t>(lo, 1); h <= hi; ++h) {
        bool hit = false;
        for (std::int64_t t = 0; t <= h && !hit; ++t)
            hit = squares_hit(sp, x[0], x[1], h, t) || squares_hit(sp, x[0], x[1], t, h);
        if (hit) out.push_back(h);
    }
}

void scan(const AnyProblem& p, const std::vector<double>& x, std::int64_t lo, std::int64_t hi,
          std::vector<std::int64_t>& out) {
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) {
        Point X(lp->n, lp->m, x);
        scan_linear(*lp, X, lo, hi, out);
    } else {
        scan_squares(std::get<SquaresProblem>(p), x, lo, hi, out);
    }
}

}  // namespace

std::vector<std::int64_t> hit_heights(const AnyProblem& p, const std::vector<double>& x, std::int64_t lo,
                                      std::int64_t hi, bool first_only) {
    std::vector<std::int64_t> out;
    lo = std::max<std::int64_t>(lo, 1);
    if (hi < lo) return out;
    if (!first_only) {
        scan(p, x, lo, hi, out);
    } else {
        // doubling stages; each stage only looks at new heights
        std::int64_t stage_lo = lo, stage_hi = std::min(hi, std::max<std::int64_t>(lo, 16));
        for (;;) {
            scan(p, x, stage_lo, stage_hi, out);
            if (!out.empty() || stage_hi == hi) break;
            stage_lo = stage_hi + 1;
            stage_hi = std::min(hi, 2 * stage_hi);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (first_only && out.size() > 1) out.resize(1);
    return out;
}

bool hits_window(const AnyProblem& p, const std::vector<double>& x, const Window& w) {
    return !hit_heights(p, x, w.lo, w.hi, true).empty();
}

WilsonInterval wilson95(std::int64_t hits, std::int64_t samples) {
    if (samples <= 0) return {0.0, 1.0};
    const double z = 1.96;
    double n = double(samples), ph = double(hits) / n;
    double denom = 1.0 + z * z / n;
    double center = (ph + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

std::vector<double> sample_point(std::uint64_t seed, std::uint64_t index, int dim) {
    CounterRng rng(seed, index);
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform();
    return x;
}

bool zero_everywhere(const AnyProblem& p) {
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) return lp->psi.identically_zero();
    return std::get<SquaresProblem>(p).identically_zero();
}

}  // namespace

std::vector<MCMeasureReport> mc_measure_windows(const AnyProblem& p, const std::vector<Window>& windows,
                                                std::int64_t samples, std::uint64_t seed, int threads) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    for (auto& w : windows)
        if (w.lo > w.hi) throw std::invalid_argument("window needs H1 <= H2");
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) lp->validate();
    const int dim = ambient_dim(p);
    const bool zero = zero_everywhere(p);
    std::int64_t lo = windows.empty() ? 1 : windows.front().lo, hi = 0;
    bool common_lo = true;
    for (auto& w : windows) {
        lo = std::min(lo, w.lo);
        hi = std::max(hi, w.hi);
        common_lo = common_lo && w.lo == windows.front().lo;
    }

    const std::size_t block = 256;
    std::size_t nblocks = std::size_t((samples + block - 1) / block);
    std::vector<std::vector<std::int64_t>> counts(nblocks, std::vector<std::int64_t>(windows.size(), 0));
    if (!zero) {
        parallel_for(nblocks, threads, [&](std::size_t bi) {
            std::int64_t s0 = std::int64_t(bi * block), s1 = std::min<std::int64_t>(samples, s0 + block);
            for (std::int64_t s = s0; s < s1; ++s) {
                auto x = sample_point(seed, std::uint64_t(s), dim);
                // nested windows sharing a left end only need the first hit
                auto hs = hit_heights(p, x, lo, hi, common_lo);
                for (std::size_t k = 0; k < windows.size(); ++k) {
                    auto it = std::lower_bound(hs.begin(), hs.end(), windows[k].lo);
                    if (it != hs.end() && *it <= windows[k].hi) ++counts[bi][k];
                }
            }
        });
    }
    std::vector<MCMeasureReport> out;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        MCMeasureReport r;
        r.window = windows[k];
        r.samples = samples;
        for (auto& c : counts) r.hits += c[k];
        r.fraction = double(r.hits) / double(samples);
        r.wilson_ci = wilson95(r.hits, samples);
        r.seed = seed;
        r.out_of_theorem = out_of_theorem(p);
        out.push_back(r);
    }
    return out;
}

MCMeasureReport mc_measure(const AnyProblem& p, std::int64_t H1, std::int64_t H2, std::int64_t samples,
                           std::uint64_t seed, int threads) {
    return mc_measure_windows(p, {{H1, H2}}, samples, seed, threads).front();
}

double union_bound(const AnyProblem& p, const Window& w) {
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) {
        // the torus set of one a has measure (2 Psi)^m while Psi <= 1/2
        NeumaierSum acc;
        double scale = ipow(2.0, lp->m);
        acc.add(scale * schmidt_window(*lp, w.lo, w.hi + 1));
        return std::min(1.0, acc.value());
    }
    const auto& sp = std::get<SquaresProblem>(p);
    NeumaierSum acc;
    for (std::int64_t h = std::max<std::int64_t>(w.lo, 1); h <= w.hi; ++h) {
        double psi = sp.psi(h);
        if (!(psi > 0.0)) continue;
        for (std::int64_t t = 0; t <= h; ++t) {
            for (int sw = 0; sw < (t == h ? 1 : 2); ++sw) {
                std::int64_t a1 = sw ? t : h, a2 = sw ? h : t;
                double A = double(a1 * a1 + a2 * a2);
                double big = double(std::max(a1, a2)) * double(std::max(a1, a2));
                std::int64_t pmax = std::int64_t(std::floor(std::sqrt(A + psi)));
                acc.add(double(pmax + 1) * 2.0 * psi / big);
            }
        }
    }
    return std::min(1.0, acc.value());
}

std::string to_string(ZeroOneReport::Trend t) {
    switch (t) {
        case ZeroOneReport::Trend::TowardOne: return "TowardOne";
        case ZeroOneReport::Trend::TowardZero: return "TowardZero";
        case ZeroOneReport::Trend::Inconclusive: return "Inconclusive";
    }
    return "?";
}

ZeroOneReport zero_one_probe(const AnyProblem& p, const std::vector<Window>& schedule, std::int64_t samples,
                             std::uint64_t seed, int threads) {
    if (schedule.size() < 4) throw std::invalid_argument("zero_one_probe needs >= 4 windows");
    ZeroOneReport rep;
    std::vector<Window> cum;
    for (auto& w : schedule) cum.push_back({1, w.hi});
    rep.cumulative = mc_measure_windows(p, cum, samples, seed, threads);
    rep.windows = mc_measure_windows(p, schedule, samples, seed, threads);

    bool increasing = true;
    for (std::size_t k = 1; k < rep.cumulative.size(); ++k)
        if (rep.cumulative[k].fraction < rep.cumulative[k - 1].fraction) increasing = false;
    for (std::size_t k = 0; k < rep.windows.size(); ++k) {
        double ub = union_bound(p, rep.windows[k].window);
        rep.union_bounds.push_back(ub);
        if (rep.windows[k].fraction > ub + 3.0 * rep.windows[k].half_width()) rep.union_bound_holds = false;
        if (k > 0 && rep.windows[k].fraction > rep.windows[k - 1].fraction) rep.window_fractions_decrease = false;
    }
    std::int64_t H = std::max<std::int64_t>(schedule.back().hi, 128);
    if (auto* lp = std::get_if<LinearFormsProblem>(&p)) {
        rep.series = classify(schmidt_sum(*lp, H, threads));
    } else {
        const auto& sp = std::get<SquaresProblem>(p);
        PartialSumSeries s;
        s.label = "SquaresMeasure";
        NeumaierSum acc, window;
        auto cps = dyadic_checkpoints(H);
        std::size_t next = 0;
        for (std::int64_t h = 1; h <= H; ++h) {
            acc.add(sp.psi(h));
            window.add(sp.psi(h));
            if (next < cps.size() && cps[next] == h) {
                s.heights.push_back(h);
                s.sums.push_back(acc.value());
                s.increments.push_back(window.value());
                window = NeumaierSum{};
                ++next;
            }
        }
        rep.series = classify(s);
    }

    using V = Classification::Verdict;
    // |a| = 1 already hits everything when Psi(1) = 1, so the cumulative test
    // cannot separate the cases; a convergent series decides first
    if (rep.union_bound_holds && rep.series.verdict == V::Converges) {
        rep.trend = ZeroOneReport::Trend::TowardZero;
    } else if (increasing && rep.cumulative.back().fraction > 0.9) {
        rep.trend = ZeroOneReport::Trend::TowardOne;
    } else {
        rep.note = rep.series.verdict == V::Inconclusive ? "borderline criterion series" : "no clear trend";
    }
    return rep;
}

// ---------------------------------------------------------------- rasters

Bitmap::Bitmap(int lvl) : level(lvl), side(std::int64_t(1) << lvl) {
    words.assign(std::size_t((side * side + 63) / 64), 0);
}

bool Bitmap::get(std::int64_t i, std::int64_t j) const {
    std::int64_t b = i * side + j;
    return (words[b >> 6] >> (b & 63)) & 1u;
}

void Bitmap::set(std::int64_t i, std::int64_t j) {
    std::int64_t b = i * side + j;
    words[b >> 6] |= std::uint64_t(1) << (b & 63);
}

void Bitmap::set_run(std::int64_t i, std::int64_t j0, std::int64_t j1) {
    if (j0 > j1) return;
    std::int64_t b0 = i * side + j0, b1 = i * side + j1;
    std::int64_t w0 = b0 >> 6, w1 = b1 >> 6;
    if (w0 == w1) {
        std::uint64_t mask = (~std::uint64_t(0) << (b0 & 63)) & (~std::uint64_t(0) >> (63 - (b1 & 63)));
        words[w0] |= mask;
        return;
    }
    words[w0] |= ~std::uint64_t(0) << (b0 & 63);
    for (auto w = w0 + 1; w < w1; ++w) words[w] = ~std::uint64_t(0);
    words[w1] |= ~std::uint64_t(0) >> (63 - (b1 & 63));
}

std::int64_t Bitmap::count() const {
    std::int64_t c = 0;
    for (auto w : words) c += __builtin_popcountll(w);
    return c;
}

namespace {

// even bits of x packed into the low 32 bits
std::uint64_t pack_even(std::uint64_t x) {
    x &= 0x5555555555555555ULL;
    x = (x | (x >> 1)) & 0x3333333333333333ULL;
    x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
    x = (x | (x >> 4)) & 0x00ff00ff00ff00ffULL;
    x = (x | (x >> 8)) & 0x0000ffff0000ffffULL;
    x = (x | (x >> 16)) & 0x00000000ffffffffULL;
    return x;
}

}  // namespace

Bitmap Bitmap::coarsen() const {
    if (level == 0) throw std::logic_error("cannot coarsen a single cell");
    Bitmap out(level - 1);
    if (side >= 128) {
        const std::int64_t wpc = side / 64;  // words per column
        for (std::int64_t I = 0; I < out.side; ++I) {
            const std::uint64_t* a = &words[std::size_t(2 * I * wpc)];
            const std::uint64_t* b = a + wpc;
            std::uint64_t* dst = &out.words[std::size_t(I * (wpc / 2))];
            for (std::int64_t k = 0; k < wpc; k += 2) {
                std::uint64_t w0 = a[k] | b[k], w1 = a[k + 1] | b[k + 1];
                std::uint64_t lo = pack_even(w0 | (w0 >> 1)), hi = pack_even(w1 | (w1 >> 1));
                dst[k / 2] = lo | (hi << 32);
            }
        }
        return out;
    }
    for (std::int64_t i = 0; i < side; ++i)
        for (std::int64_t j = 0; j < side; ++j)
            if (get(i, j)) out.set(i / 2, j / 2);
    return out;
}

void Bitmap::and_with(const Bitmap& o) {
    if (o.level != level) throw std::invalid_argument("bitmap levels differ");
    for (std::size_t k = 0; k < words.size(); ++k) words[k] &= o.words[k];
}

namespace {

// closed cells meeting the open strip |c1 x + c2 y - v| < w inside the unit square
void paint_strip(Bitmap& bm, double c1, double c2, double v, double w) {
    const std::int64_t R = bm.side;
    const double Rd = double(R);
    auto span = [&](double lo, double hi, std::int64_t& u0, std::int64_t& u1) {
        u0 = std::max<std::int64_t>(0, std::int64_t(std::floor(lo * Rd)));
        u1 = std::min<std::int64_t>(R - 1, std::int64_t(std::ceil(hi * Rd)) - 1);
    };
    if (c2 == 0.0) {
        if (c1 == 0.0) return;
        double lo = (v - w) / c1, hi = (v + w) / c1;
        if (c1 < 0) std::swap(lo, hi);
        if (!(lo < 1.0 && hi > 0.0)) return;
        std::int64_t i0, i1;
        span(lo, hi, i0, i1);
        for (auto i = i0; i <= i1; ++i) bm.set_run(i, 0, R - 1);
        return;
    }
    for (std::int64_t i = 0; i < R; ++i) {
        double x0 = double(i) / Rd, x1 = double(i + 1) / Rd;
        double ya = (v - w - c1 * x0) / c2, yb = (v + w - c1 * x0) / c2;
        double yc = (v - w - c1 * x1) / c2, yd = (v + w - c1 * x1) / c2;
        double lo = std::min({ya, yb, yc, yd}), hi = std::max({ya, yb, yc, yd});
        if (!(lo < 1.0 && hi > 0.0)) continue;
        std::int64_t j0, j1;
        span(lo, hi, j0, j1);
        bm.set_run(i, j0, j1);
    }
}

// closed cells meeting the open rectangle (x0,x1) x (y0,y1)
void paint_rect_open(Bitmap& bm, double x0, double x1, double y0, double y1) {
    const std::int64_t R = bm.side;
    const double Rd = double(R);
    if (!(x0 < 1.0 && x1 > 0.0 && y0 < 1.0 && y1 > 0.0)) return;
    std::int64_t i0 = std::max<std::int64_t>(0, std::int64_t(std::floor(x0 * Rd)));
    std::int64_t i1 = std::min<std::int64_t>(R - 1, std::int64_t(std::ceil(x1 * Rd)) - 1);
    std::int64_t j0 = std::max<std::int64_t>(0, std::int64_t(std::floor(y0 * Rd)));
    std::int64_t j1 = std::min<std::int64_t>(R - 1, std::int64_t(std::ceil(y1 * Rd)) - 1);
    for (auto i = i0; i <= i1; ++i) bm.set_run(i, j0, j1);
}

// half-open cells meeting the half-open box [x0,x1) x [y0,y1)
void paint_rect_halfopen(Bitmap& bm, double x0, double x1, double y0, double y1) {
    const std::int64_t R = bm.side;
    const double Rd = double(R);
    if (!(x0 < x1 && y0 < y1)) return;
    std::int64_t i0 = std::max<std::int64_t>(0, std::int64_t(std::floor(x0 * Rd)));
    std::int64_t i1 = std::min<std::int64_t>(R - 1, std::int64_t(std::ceil(x1 * Rd)) - 1);
    std::int64_t j0 = std::max<std::int64_t>(0, std::int64_t(std::floor(y0 * Rd)));
    std::int64_t j1 = std::min<std::int64_t>(R - 1, std::int64_t(std::ceil(y1 * Rd)) - 1);
    for (auto i = i0; i <= i1; ++i) bm.set_run(i, j0, j1);
}

}  // namespace

GenerationSet::GenerationSet(AnyProblem p, std::vector<Window> schedule)
    : problem_(std::move(p)), windows_(std::move(schedule)) {
    for (std::size_t k = 0; k < windows_.size(); ++k) {
        if (windows_[k].lo > windows_[k].hi || windows_[k].lo < 1)
            throw std::invalid_argument("generation window must satisfy 1 <= lo <= hi");
        if (k > 0 && windows_[k].lo <= windows_[k - 1].hi)
            throw std::invalid_argument("generation windows must be disjoint and increasing");
    }
    if (auto* lp = std::get_if<LinearFormsProblem>(&problem_)) lp->validate();
}

int GenerationSet::dim() const { return ambient_dim(problem_); }

bool GenerationSet::contains(const std::vector<double>& x) const {
    for (auto& w : windows_)
        if (!hits_window(problem_, x, w)) return false;
    return true;
}

Bitmap GenerationSet::window_raster(const Window& w, int level) const {
    Bitmap bm(level);
    if (auto* lp = std::get_if<LinearFormsProblem>(&problem_)) {
        const auto& p = *lp;
        if (p.n * p.m != 2) throw std::invalid_argument("exact raster needs a planar problem");
        for (std::int64_t h = w.lo; h <= w.hi; ++h) {
            for_each_in_shell(p.n, h, [&](const IVec& a) {
                double psi = psi_value(p, a);
                if (!(psi > 0.0)) return;
                double aa = 0.0;
                for (auto v : a) aa += double(v) * double(v);
                auto sr = relevant_shifts(a, p.b, psi / std::sqrt(aa));
                if (p.n == 2) {
                    for (auto q = sr.ranges[0].first; q <= sr.ranges[0].second; ++q)
                        paint_strip(bm, double(a[0]), double(a[1]), p.b[0] + double(q), psi);
                } else {
                    double A = double(a[0]), r = psi / std::abs(A);
                    for (auto q1 = sr.ranges[0].first; q1 <= sr.ranges[0].second; ++q1) {
                        double c1 = (p.b[0] + double(q1)) / A;
                        for (auto q2 = sr.ranges[1].first; q2 <= sr.ranges[1].second; ++q2) {
                            double c2 = (p.b[1] + double(q2)) / A;
                            paint_rect_open(bm, c1 - r, c1 + r, c2 - r, c2 + r);
                        }
                    }
                }
            });
        }
        return bm;
    }
    const auto& sp = std::get<SquaresProblem>(problem_);
    for (std::int64_t h = w.lo; h <= w.hi; ++h) {
        double psi = sp.psi(h);
        if (!(psi > 0.0)) continue;
        for (std::int64_t t = 0; t <= h; ++t) {
            for (int sw = 0; sw < (t == h ? 1 : 2); ++sw) {
                std::int64_t a1 = sw ? t : h, a2 = sw ? h : t;
                double c1 = double(a1 * a1), c2 = double(a2 * a2);
                std::int64_t pmax = std::int64_t(std::floor(std::sqrt(c1 + c2 + psi)));
                for (std::int64_t q = 0; q <= pmax; ++q) paint_strip(bm, c1, c2, double(q * q), psi);
            }
        }
    }
    return bm;
}

bool GenerationSet::raster(int level, Bitmap& out) const {
    if (dim() != 2) return false;
    if (windows_.empty()) {
        out = Bitmap(level);
        for (auto& w : out.words) w = ~std::uint64_t(0);
        if (out.side * out.side < 64) out.words[0] = (std::uint64_t(1) << (out.side * out.side)) - 1;
        return true;
    }
    out = window_raster(windows_.front(), level);
    for (std::size_t k = 1; k < windows_.size(); ++k) out.and_with(window_raster(windows_[k], level));
    return true;
}

GenerationSet generation_set(const AnyProblem& p, int K, const std::vector<Window>& schedule) {
    if (K < 0 || std::size_t(K) > schedule.size()) throw std::invalid_argument("K exceeds the schedule length");
    return GenerationSet(p, std::vector<Window>(schedule.begin(), schedule.begin() + K));
}

BoxUnionSet::BoxUnionSet(int dim, std::vector<Box> boxes) : dim_(dim), boxes_(std::move(boxes)) {
    for (auto& b : boxes_)
        if (int(b.lo.size()) != dim_ || int(b.hi.size()) != dim_)
            throw std::invalid_argument("box dimension mismatch");
}

bool BoxUnionSet::contains(const std::vector<double>& x) const {
    for (auto& b : boxes_) {
        bool in = true;
        for (int i = 0; i < dim_ && in; ++i) in = b.lo[i] <= x[i] && x[i] < b.hi[i];
        if (in) return true;
    }
    return false;
}

bool BoxUnionSet::raster(int level, Bitmap& out) const {
    if (dim_ != 2) return false;
    out = Bitmap(level);
    for (auto& b : boxes_) paint_rect_halfopen(out, b.lo[0], b.hi[0], b.lo[1], b.hi[1]);
    return true;
}

std::string to_string(const BoxSampling& s) {
    switch (s.mode) {
        case BoxSampling::Mode::Exact: return "exact-raster(base 2^-" + std::to_string(s.base_level) + ")";
        case BoxSampling::Mode::CenterProbe: return "center-probe";
        case BoxSampling::Mode::Subgrid: return "subgrid(" + std::to_string(s.subgrid) + ")";
    }
    return "?";
}

namespace {

std::int64_t probe_count(const SetOracle& set, int level, const BoxSampling& s) {
    const int d = set.dim();
    const std::int64_t R = std::int64_t(1) << level;
    const int sub = s.mode == BoxSampling::Mode::CenterProbe ? 1 : std::max(1, s.subgrid);
    std::int64_t boxes = 1;
    for (int i = 0; i < d; ++i) boxes *= R;
    std::int64_t probes = 1;
    for (int i = 0; i < d; ++i) probes *= sub;
    std::int64_t count = 0;
    std::vector<double> x(d);
    for (std::int64_t b = 0; b < boxes; ++b) {
        for (std::int64_t q = 0; q < probes; ++q) {
            std::int64_t bb = b, qq = q;
            for (int i = 0; i < d; ++i) {
                x[i] = (double(bb % R) + (double(qq % sub) + 0.5) / sub) / double(R);
                bb /= R;
                qq /= sub;
            }
            if (set.contains(x)) {
                ++count;
                break;
            }
        }
    }
    return count;
}

}  // namespace

BoxCountReport box_count(const SetOracle& set, const std::vector<int>& levels, const BoxSampling& sampling,
                         std::pair<std::size_t, std::size_t> fit_range) {
    if (levels.size() < 5) throw std::invalid_argument("box_count needs >= 5 scales");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] != levels[i - 1] + 1) throw std::invalid_argument("scales must be consecutive dyadic levels");
    BoxCountReport rep;
    rep.levels = levels;
    for (int l : levels) rep.scales.push_back(std::ldexp(1.0, -l));
    if (auto* gs = dynamic_cast<const GenerationSet*>(&set)) rep.generations = gs->windows();

    BoxSampling eff = sampling;
    Bitmap base;
    if (eff.mode == BoxSampling::Mode::Exact) {
        int L = std::max(eff.base_level, levels.back());
        if (set.raster(L, base)) {
            eff.base_level = L;
        } else {
            eff.mode = BoxSampling::Mode::Subgrid;
            rep.note = "exact raster unavailable in dimension " + std::to_string(set.dim()) + "; subgrid probes used";
        }
    }
    rep.sampling = to_string(eff);
    rep.counts.assign(levels.size(), 0);
    if (eff.mode == BoxSampling::Mode::Exact) {
        Bitmap cur = std::move(base);
        while (cur.level > levels.back()) cur = cur.coarsen();
        for (std::size_t k = levels.size(); k-- > 0;) {
            while (cur.level > levels[k]) cur = cur.coarsen();
            rep.counts[k] = cur.count();
        }
    } else {
        for (std::size_t k = 0; k < levels.size(); ++k) rep.counts[k] = probe_count(set, levels[k], eff);
    }

    if (fit_range.first == 0 && fit_range.second == 0) fit_range = {0, levels.size() - 1};
    rep.fit_range = fit_range;
    std::vector<double> x, y;
    for (std::size_t k = fit_range.first; k <= fit_range.second && k < levels.size(); ++k) {
        if (rep.counts[k] <= 0) continue;
        x.push_back(levels[k] * std::log(2.0));
        y.push_back(std::log(double(rep.counts[k])));
    }
    for (std::size_t k = 1; k < levels.size(); ++k) {
        double a = double(std::max<std::int64_t>(rep.counts[k - 1], 1)), b = double(std::max<std::int64_t>(rep.counts[k], 1));
        rep.local_slopes.push_back(std::log(b / a) / std::log(2.0));
    }
    if (x.size() >= 2) {
        double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxx += (x[i] - mx) * (x[i] - mx);
            sxy += (x[i] - mx) * (y[i] - my);
        }
        rep.slope = sxy / sxx;
        double ss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - my - rep.slope * (x[i] - mx);
            ss += r * r;
        }
        rep.residual = std::sqrt(ss / x.size());
    }
    return rep;
}

ContentReport content_from_count(std::int64_t boxes, int dim, const DimensionFunction& f, int level, Norm norm) {
    ContentReport c;
    c.f = f;
    c.rho = std::ldexp(1.0, -level);
    c.boxes = boxes;
    c.norm = norm;
    c.radius = norm == Norm::Supremum ? c.rho / 2.0 : c.rho * std::sqrt(double(dim)) / 2.0;
    c.value = boxes > 0 ? double(boxes) * f(c.radius) : 0.0;
    return c;
}

ContentReport content_upper_bound(const SetOracle& set, const DimensionFunction& f, int level, Norm norm,
                                  const BoxSampling& sampling) {
    std::int64_t n = 0;
    Bitmap bm;
    if (sampling.mode == BoxSampling::Mode::Exact && set.raster(std::max(level, sampling.base_level), bm)) {
        while (bm.level > level) bm = bm.coarsen();
        n = bm.count();
    } else {
        BoxSampling s = sampling;
        if (s.mode == BoxSampling::Mode::Exact) s.mode = BoxSampling::Mode::Subgrid;
        n = probe_count(set, level, s);
    }
    return content_from_count(n, set.dim(), f, level, norm);
}

}  // namespace diolab
