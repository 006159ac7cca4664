#include "diolab/slicing.hpp"

#include "diolab/parallel.hpp"
#include "diolab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <stdexcept>

namespace diolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double frac(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

double circle_dist(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

}  // namespace

void SliceSpec::validate() const {
    problem.validate();
    const auto& sup = problem.psi.support;
    if (sup.zi != std::set<int>{1})
        throw std::invalid_argument("slice support must be restricted to Z_1 (|a| = |a_1|)");
    if (x0.size() != std::size_t(problem.n - 1) * problem.m)
        throw std::invalid_argument("slice x0 must fix (n-1)m coordinates");
}

double SliceSpec::beta(const IVec& a, int j) const {
    const int n = problem.n;
    double t = 0.0;
    for (int i = 1; i < n; ++i) t += double(a[i]) * x0[std::size_t(j) * (n - 1) + (i - 1)];
    return problem.b[j] - t;
}

Point SliceSpec::embed(const std::vector<double>& y) const {
    const int n = problem.n, m = problem.m;
    Point X(n, m);
    for (int j = 0; j < m; ++j) {
        X.at(0, j) = y[j];
        for (int i = 1; i < n; ++i) X.at(i, j) = x0[std::size_t(j) * (n - 1) + (i - 1)];
    }
    return X;
}

double slice_center(const SliceSpec& s, const IVec& a, std::int64_t p_j, int j) {
    return frac((s.beta(a, j) - double(p_j)) / double(a[0]));
}

SliceBallFamily slice_balls(const SliceSpec& s, std::int64_t H1, std::int64_t H2) {
    s.validate();
    const int n = s.problem.n, m = s.problem.m;
    SliceBallFamily fam;
    fam.m = m;
    fam.torus = true;
    for (std::int64_t h = std::max<std::int64_t>(H1, 1); h <= H2; ++h) {
        for_each_in_shell(n, h, [&](const IVec& a) {
            double psi = psi_value(s.problem, a);
            if (!(psi > 0.0)) return;
            const std::int64_t q = std::abs(a[0]);
            const double r = psi / double(q);
            IVec p(m, 0);
            while (true) {
                SliceBall b;
                b.center.resize(m);
                for (int j = 0; j < m; ++j) b.center[j] = slice_center(s, a, p[j], j);
                b.radius = r;
                b.a = a;
                b.p = p;
                fam.balls.push_back(std::move(b));
                int j = 0;
                while (j < m && ++p[j] == q) p[j++] = 0;
                if (j == m) break;
            }
        });
    }
    return fam;
}

bool family_contains(const SliceBallFamily& fam, const std::vector<double>& y) {
    for (const auto& b : fam.balls) {
        bool in = true;
        for (int j = 0; j < fam.m && in; ++j) {
            double d = fam.torus ? circle_dist(y[j], b.center[j]) : std::abs(y[j] - b.center[j]);
            in = d < b.radius;
        }
        if (in) return true;
    }
    return false;
}

double inflate_radius(double r, const DimensionFunction& g, int m) {
    if (g.is_power(m)) return r;
    double v = g(r);
    return m == 1 ? v : std::pow(v, 1.0 / m);
}

double deflate_radius(double r, const DimensionFunction& g, int m) {
    if (g.is_power(m)) return r;
    return invert(g, ipow(r, m));
}

long double psi_tilde(double psi, std::int64_t height, const DimensionFunction& g, int m) {
    return static_cast<long double>(height) * inflate_radius(psi / double(height), g, m);
}

SliceBallFamily transform_family(const SliceBallFamily& fam, const DimensionFunction& g, int m,
                                 FamilyTransform direction) {
    if (m != fam.m) throw std::invalid_argument("transform_family: m does not match the family");
    if (direction == FamilyTransform::Deflate && g.kind() == DimensionFunction::Kind::Tabulated) {
        const auto& smp = g.samples();
        for (std::size_t i = 1; i < smp.size(); ++i)
            if (!(g(smp[i].first) > g(smp[i - 1].first)))
                throw DomainError("deflate needs a strictly increasing g");
    }
    SliceBallFamily out = fam;
    for (auto& b : out.balls) {
        if (b.radius > g.domain_max()) throw DomainError("radius outside the domain of g");
        b.radius = direction == FamilyTransform::Inflate ? inflate_radius(b.radius, g, m)
                                                         : deflate_radius(b.radius, g, m);
    }
    return out;
}

SliceBallFamily shrink_family(const SliceBallFamily& fam, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("shrink factor must lie in (0, 1)");
    SliceBallFamily out = fam;
    for (auto& b : out.balls) b.radius *= delta;
    return out;
}

namespace {

// arcs -> sorted disjoint pieces of [0, 1); nullopt-like flag when everything is covered
bool arc_components(std::vector<std::pair<double, double>>& arcs,
                    std::vector<std::pair<double, double>>& comps) {
    std::vector<std::pair<double, double>> pieces;
    pieces.reserve(arcs.size() + 8);
    for (auto [lo, hi] : arcs) {
        double len = hi - lo;
        if (!(len > 0.0)) continue;
        if (len >= 1.0) return true;
        double a = frac(lo), b = a + len;
        if (b > 1.0) {
            pieces.emplace_back(a, 1.0);
            pieces.emplace_back(0.0, b - 1.0);
        } else {
            pieces.emplace_back(a, b);
        }
    }
    std::sort(pieces.begin(), pieces.end());
    comps.clear();
    for (auto [lo, hi] : pieces) {
        if (!comps.empty() && lo <= comps.back().second)
            comps.back().second = std::max(comps.back().second, hi);
        else
            comps.emplace_back(lo, hi);
    }
    if (comps.size() == 1 && comps[0].first <= 0.0 && comps[0].second >= 1.0) return true;
    return false;
}

}  // namespace

double arc_union_length(std::vector<std::pair<double, double>> arcs) {
    std::vector<std::pair<double, double>> comps;
    if (arc_components(arcs, comps)) return 1.0;
    double total = 0.0;
    for (auto [lo, hi] : comps) total += hi - lo;
    return std::min(total, 1.0);
}

double arc_union_content(std::vector<std::pair<double, double>> arcs, const DimensionFunction& g) {
    std::vector<std::pair<double, double>> comps;
    if (arc_components(arcs, comps)) return g(0.5);
    if (comps.empty()) return 0.0;
    // the first and last pieces meet across 0
    if (comps.size() > 1 && comps.front().first <= 0.0 && comps.back().second >= 1.0) {
        comps.front().first = comps.back().first - 1.0;
        comps.pop_back();
    }
    double total = 0.0;
    for (auto [lo, hi] : comps) total += g(0.5 * (hi - lo));
    return total;
}

SliceMeasure slice_measure_probe(const SliceBallFamily& fam, std::int64_t samples, std::uint64_t seed) {
    SliceMeasure out;
    out.seed = seed;
    if (fam.m == 1 && fam.torus) {
        std::vector<std::pair<double, double>> arcs;
        arcs.reserve(fam.balls.size());
        for (const auto& b : fam.balls) arcs.emplace_back(b.center[0] - b.radius, b.center[0] + b.radius);
        out.fraction = arc_union_length(std::move(arcs));
        out.exact = true;
        out.ci = {out.fraction, out.fraction};
        return out;
    }
    if (samples < 1) throw std::invalid_argument("slice_measure_probe needs samples >= 1");
    std::int64_t hits = 0;
    std::vector<double> y(fam.m);
    for (std::int64_t i = 0; i < samples; ++i) {
        CounterRng rng(seed, std::uint64_t(i));
        for (auto& v : y) v = rng.uniform();
        if (family_contains(fam, y)) ++hits;
    }
    out.samples = samples;
    out.hits = hits;
    out.fraction = double(hits) / double(samples);
    out.ci = wilson95(hits, samples);
    return out;
}

std::vector<std::vector<double>> slice_points(int n, int m, int count) {
    const int d = (n - 1) * m;
    std::vector<std::vector<double>> out(std::size_t(std::max(count, 0)));
    if (d == 0) return out;
    // phi_d: the positive root of x^{d+1} = x + 1
    double phi = 2.0;
    for (int it = 0; it < 200; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
    std::vector<double> alpha(d);
    for (int i = 0; i < d; ++i) alpha[i] = frac(std::pow(1.0 / phi, i + 1));
    for (int k = 0; k < count; ++k) {
        out[k].resize(d);
        for (int i = 0; i < d; ++i) out[k][i] = frac(0.5 + double(k + 1) * alpha[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact arc unions for m = 1 at scale.
//
// All balls with |a_1| = q repeat with period 1/q, so a family is a sorted list
// of offsets in [0, 1/q) and one radius per entry and radius set. The sweep
// visits centres chunk by chunk, buckets them, and feeds several merge states
// at once. A state accepts pieces out of order as long as every later piece
// starts after its frontier, so bucket order is enough.

namespace {

struct Family {
    std::int64_t q = 1;
    int window = 0;
    double invq = 1.0;
    std::vector<double> off;
    std::vector<double> psi;                // Psi(a) per entry
    std::vector<std::vector<double>> rad;   // [set][entry]
    std::vector<double> rmax;               // [set]
    std::vector<char> uniform;              // [set] one radius for every entry
};

struct Piece {
    double lo, hi;
    int window;
};

struct Consumer {
    bool half = false;
    double E = 1.0;
    std::vector<const DimensionFunction*> gs;
    std::vector<std::vector<double>> gval;  // [g][family] g(r) for single-arc components
    double length = 0.0;
    std::vector<double> content;
    bool has_first = false, has_last = false;
    std::pair<double, double> first{0, 0}, last{0, 0};
    std::int32_t last_fam = -1;

    void add(double s, double e, std::int32_t fam) {
        if (half) {
            if (fam >= 0 && s > 0.0 && e < E) {
                length += 2.0 * (e - s);
                for (std::size_t i = 0; i < gs.size(); ++i) content[i] += 2.0 * gval[i][fam];
                return;
            }
            account_half(s, e);
            return;
        }
        if (!has_first) {
            first = {s, e};
            has_first = true;
            return;
        }
        if (has_last) account(last.second - last.first, last_fam);
        last = {s, e};
        last_fam = fam;
        has_last = true;
    }
    void account(double len, std::int32_t fam = -1) {
        length += len;
        if (fam >= 0) {
            for (std::size_t i = 0; i < gs.size(); ++i) content[i] += gval[i][fam];
            return;
        }
        for (std::size_t i = 0; i < gs.size(); ++i) content[i] += (*gs[i])(0.5 * len);
    }
    void account_half(double s, double e) {
        if (s <= 0.0 && e >= E) {
            length += 1.0;
            for (std::size_t i = 0; i < gs.size(); ++i) content[i] += (*gs[i])(0.5);
        } else if (s <= 0.0) {
            length += 2.0 * e;
            for (std::size_t i = 0; i < gs.size(); ++i) content[i] += (*gs[i])(e);
        } else if (e >= E) {
            length += 2.0 * (E - s);
            for (std::size_t i = 0; i < gs.size(); ++i) content[i] += (*gs[i])(E - s);
        } else {
            length += 2.0 * (e - s);
            for (std::size_t i = 0; i < gs.size(); ++i) content[i] += 2.0 * (*gs[i])(0.5 * (e - s));
        }
    }
    void finish() {
        if (half || !has_first) return;
        if (!has_last) {
            if (first.first <= 0.0 && first.second >= 1.0) {
                length += 1.0;
                for (std::size_t i = 0; i < gs.size(); ++i) content[i] += (*gs[i])(0.5);
            } else {
                account(first.second - first.first);
            }
            return;
        }
        if (first.first <= 0.0 && last.second >= 1.0) {
            account((first.second - first.first) + (last.second - last.first));
        } else {
            account(first.second - first.first);
            account(last.second - last.first);
        }
    }
};

struct MergeState {
    int set = 0;
    int wlo = 0, whi = 0;
    struct Comp {
        double s, e;
        std::int32_t fam;  // family of a lone unclipped arc, else -1
    };
    std::deque<Comp> comps;
    const std::vector<Piece>* wide = nullptr;
    std::size_t wide_next = 0;
    double frontier = -kInf;  // last bucket frontier this state was advanced to
    double lastlim = -kInf;   // no later piece starts below this
    Consumer out;
    // A chained state takes no pieces of its own; it unions the retired
    // components of its sources.
    std::vector<MergeState*> sinks;
    std::vector<const MergeState*> sources;

    double pending_bound() const {
        return comps.empty() ? lastlim : std::min(comps.front().s, lastlim);
    }

    void emit(const Comp& c) {
        out.add(c.s, c.e, c.fam);
        for (MergeState* d : sinks) d->feed(c);
    }

    void feed(const Comp& c) {
        insert(c.s, c.e, c.fam);
        double bound = kInf;
        for (const MergeState* src : sources) bound = std::min(bound, src->pending_bound());
        while (!comps.empty() && comps.front().e < bound) {
            emit(comps.front());
            comps.pop_front();
        }
    }

    bool accepts(int w) const { return w >= wlo && w <= whi; }

    double next_wide_lo() {
        while (wide_next < wide->size() && !accepts((*wide)[wide_next].window)) ++wide_next;
        return wide_next < wide->size() ? (*wide)[wide_next].lo : kInf;
    }

    void insert(double lo, double hi, std::int32_t fam = -1) {
        if (comps.empty() || lo > comps.back().e) {
            comps.push_back({lo, hi, fam});
            return;
        }
        if (lo >= comps.back().s) {
            Comp& c = comps.back();
            if (hi > c.e) c.e = hi;
            c.fam = -1;
            return;
        }
        auto it = std::lower_bound(comps.begin(), comps.end(), lo, [](const Comp& c, double v) { return c.e < v; });
        auto jt = it;
        double s = lo, e = hi;
        while (jt != comps.end() && jt->s <= hi) {
            s = std::min(s, jt->s);
            e = std::max(e, jt->e);
            ++jt;
        }
        if (it == jt) {
            comps.insert(it, {lo, hi, fam});
        } else {
            *it = {s, e, -1};
            comps.erase(it + 1, jt);
        }
    }

    // bring in wide pieces starting before the frontier, then retire what no later piece can reach
    void advance(double frontier) {
        double wl = next_wide_lo();
        while (wl < frontier) {
            const Piece& pc = (*wide)[wide_next++];
            insert(pc.lo, pc.hi);
            wl = next_wide_lo();
        }
        const double lim = std::min(frontier, wl);
        lastlim = std::max(lastlim, lim);
        while (!comps.empty() && comps.front().e < lim) {
            const Comp c = comps.front();
            comps.pop_front();
            emit(c);
        }
    }

    void finish() {
        advance(kInf);
        lastlim = kInf;
        while (!comps.empty()) {
            const Comp c = comps.front();
            comps.pop_front();
            emit(c);
        }
        out.finish();
    }
};

struct Element {
    double c;
    std::uint32_t src;  // index into the chunk's generation order
    std::uint16_t window;
    std::uint16_t uniform;  // bit k: set k has one radius in this family
};

struct SweepSetup {
    bool half = false;
    std::vector<Family> fams;
    int nsets = 0;
    int nwindows = 0;
};

// Runs every state over the families. rcut[set]: pieces with larger radius go
// through the sorted wide list instead of the bucketed stream.
void sweep(const SweepSetup& S, std::vector<MergeState>& states, const std::vector<double>& rcut) {
    const double E = S.half ? 0.5 : 1.0;
    const int nsets = S.nsets;

    std::vector<std::vector<Piece>> wide(nsets);
    auto add_clipped = [&](std::vector<Piece>& v, double lo, double hi, int w) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, E);
        if (lo < hi) v.push_back({lo, hi, w});
    };
    double rc_max = 0.0;
    for (int k = 0; k < nsets; ++k) rc_max = std::max(rc_max, rcut[k]);

    for (const Family& F : S.fams) {
        const std::size_t ne = F.off.size();
        for (int k = 0; k < nsets; ++k) {
            const auto& rad = F.rad[k];
            if (F.rmax[k] > rcut[k]) {
                for (std::int64_t t = 0; t < F.q; ++t) {
                    const double base = double(t) * F.invq;
                    for (std::size_t e = 0; e < ne; ++e) {
                        double r = rad[e];
                        if (!(r > rcut[k])) continue;
                        r = std::min(r, 0.5);
                        const double c = base + F.off[e];
                        for (int img = -1; img <= 1; ++img) add_clipped(wide[k], c + img - r, c + img + r, F.window);
                    }
                }
            }
            // wrap images of the bulk pieces near 0 and 1
            if (rcut[k] > 0.0) {
                for (std::size_t e = 0; e < ne; ++e) {
                    const double r = rad[e];
                    if (r > rcut[k] || !(r > 0.0)) continue;
                    const double c0 = F.off[e];
                    if (c0 - r < 0.0) add_clipped(wide[k], c0 + 1.0 - r, c0 + 1.0 + r, F.window);
                    const double c1 = double(F.q - 1) * F.invq + F.off[e];
                    if (c1 + r > 1.0) add_clipped(wide[k], c1 - 1.0 - r, c1 - 1.0 + r, F.window);
                }
            }
        }
    }
    for (auto& v : wide) std::sort(v.begin(), v.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    for (auto& st : states) {
        st.wide = &wide[st.set];
        st.wide_next = 0;
        st.out.half = S.half;
        st.out.E = E;
        st.out.content.assign(st.out.gs.size(), 0.0);
        st.out.gval.assign(st.out.gs.size(), std::vector<double>(S.fams.size(), 0.0));
        for (std::size_t i = 0; i < st.out.gs.size(); ++i)
            for (std::size_t fi = 0; fi < S.fams.size(); ++fi) {
                const Family& F = S.fams[fi];
                if (F.uniform[st.set] && !F.rad[st.set].empty()) st.out.gval[i][fi] = (*st.out.gs[i])(F.rad[st.set][0]);
            }
    }

    bool any_bulk = false;
    std::int64_t total = 0;
    for (const Family& F : S.fams) {
        bool bulk = false;
        for (int k = 0; k < nsets; ++k) bulk = bulk || (rcut[k] > 0.0);
        if (bulk) {
            any_bulk = true;
            total += std::int64_t(F.off.size()) * F.q;
        }
    }

    // states per (set, window), so one element touches only the states that want it
    std::vector<std::vector<std::vector<MergeState*>>> route(
        nsets, std::vector<std::vector<MergeState*>>(std::max(S.nwindows, 1)));
    for (auto& st : states)
        for (int w = 0; w < S.nwindows; ++w)
            if (st.accepts(w)) route[st.set][w].push_back(&st);

    if (any_bulk) {
        const double span = S.half ? std::min(1.0, E + rc_max) : 1.0;
        const double est = double(total) * span;
        const std::size_t bucket_size = 16;
        const std::int64_t chunks = std::max<std::int64_t>(1, std::int64_t(est / 50000.0));
        std::vector<Element> buf, sorted;
        std::vector<double> rbuf;  // [src * nsets + set]
        std::vector<std::uint32_t> fbuf;  // family per src
        std::vector<std::uint32_t> cnt, bid;
        for (std::int64_t ci = 0; ci < chunks; ++ci) {
            const double c0 = span * double(ci) / double(chunks);
            const double c1 = ci + 1 == chunks ? span : span * double(ci + 1) / double(chunks);
            buf.clear();
            rbuf.clear();
            fbuf.clear();
            for (std::uint32_t fi = 0; fi < S.fams.size(); ++fi) {
                const Family& F = S.fams[fi];
                const std::size_t ne = F.off.size();
                if (ne == 0) continue;
                std::uint16_t umask = 0;
                for (int k = 0; k < nsets; ++k)
                    if (k < 16 && F.uniform[k]) umask |= std::uint16_t(1u << k);
                std::int64_t t = std::max<std::int64_t>(0, std::int64_t(std::floor(c0 * double(F.q))) - 1);
                for (; t < F.q; ++t) {
                    const double base = double(t) * F.invq;
                    if (base >= c1) break;
                    std::size_t e0 = 0;
                    if (base < c0)
                        e0 = std::size_t(std::lower_bound(F.off.begin(), F.off.end(), c0 - base) - F.off.begin());
                    for (std::size_t e = e0; e < ne; ++e) {
                        const double c = base + F.off[e];
                        if (c >= c1) break;
                        if (c < c0) continue;
                        buf.push_back({c, std::uint32_t(buf.size()), std::uint16_t(F.window), umask});
                        fbuf.push_back(fi);
                        for (int k = 0; k < nsets; ++k) rbuf.push_back(F.uniform[k] ? F.rad[k][0] : F.rad[k][e]);
                    }
                }
            }
            const std::size_t nb = buf.size();
            if (nb == 0) continue;
            const std::size_t B = nb / bucket_size + 1;
            const double scale = double(B) / (c1 - c0);
            cnt.assign(B + 1, 0);
            bid.resize(nb);
            for (std::size_t i = 0; i < nb; ++i) {
                std::size_t b = std::size_t((buf[i].c - c0) * scale);
                if (b >= B) b = B - 1;
                bid[i] = std::uint32_t(b);
                ++cnt[b + 1];
            }
            for (std::size_t b = 0; b < B; ++b) cnt[b + 1] += cnt[b];
            std::vector<std::uint32_t> start(cnt.begin(), cnt.end());
            sorted.resize(nb);
            for (std::size_t i = 0; i < nb; ++i) sorted[start[bid[i]]++] = buf[i];

            for (std::size_t b = 0; b < B; ++b) {
                const std::uint32_t lo = cnt[b], hi = cnt[b + 1];
                if (lo == hi) continue;
                const double blo = c0 + double(b) / scale;
                std::sort(sorted.begin() + lo, sorted.begin() + hi,
                          [](const Element& x, const Element& y) { return x.c < y.c; });
                for (std::uint32_t i = lo; i < hi; ++i) {
                    const Element& el = sorted[i];
                    for (int k = 0; k < nsets; ++k) {
                        const auto& targets = route[k][el.window];
                        if (targets.empty()) continue;
                        const double r = rbuf[std::size_t(el.src) * nsets + k];
                        if (r > rcut[k] || !(r > 0.0)) continue;
                        const double plo = std::max(el.c - r, 0.0), phi = std::min(el.c + r, E);
                        if (!(plo < phi)) continue;
                        const std::int32_t tag =
                            k < 16 && (el.uniform >> k & 1u) && plo == el.c - r && phi == el.c + r ? std::int32_t(fbuf[el.src]) : -1;
                        const double frontier = blo - rcut[k] - 1e-15;
                        for (MergeState* st : targets) {
                            if (st->frontier != frontier) {
                                st->frontier = frontier;
                                st->advance(frontier);
                            }
                            st->insert(plo, phi, tag);
                        }
                    }
                }
            }
            // states that saw nothing in this chunk still move on, so chained states can drain
            for (auto& st : states) {
                if (!st.sources.empty()) continue;
                const double frontier = c1 - rcut[st.set] - 1e-15;
                if (frontier > st.frontier) {
                    st.frontier = frontier;
                    st.advance(frontier);
                }
            }
        }
    }
    for (auto& st : states)
        if (st.sources.empty()) st.finish();
    for (auto& st : states)
        if (!st.sources.empty()) st.finish();
}

// Picks per-set cut radii so that at most `budget` pieces take the wide path.
std::vector<double> choose_cuts(const SweepSetup& S, std::int64_t budget) {
    std::vector<double> cuts(S.nsets, 0.0);
    for (int k = 0; k < S.nsets; ++k) {
        std::vector<std::pair<double, std::int64_t>> byr;
        std::int64_t all = 0;
        for (const Family& F : S.fams) {
            std::int64_t c = std::int64_t(F.off.size()) * F.q;
            byr.emplace_back(F.rmax[k], c);
            all += c;
        }
        if (all <= budget) {
            cuts[k] = 0.0;
            continue;
        }
        std::sort(byr.begin(), byr.end(), [](auto& a, auto& b) { return a.first > b.first; });
        std::int64_t acc = 0;
        double cut = byr.front().first;
        for (auto& [r, c] : byr) {
            cut = r;
            if (acc + c > budget) break;
            acc += c;
        }
        cuts[k] = std::max(cut, 1e-300);
    }
    return cuts;
}

bool symmetric_slice(const SliceSpec& s) {
    if (s.problem.m != 1) return false;
    const double b = s.problem.b[0];
    return b == 0.0 || b == 0.5;
}

// Families for one slice. set 0: Psi/|a_1|; set 1 + i: inflated by gs[i].
SweepSetup build_families(const SliceSpec& s, const std::vector<Window>& windows,
                          const std::vector<DimensionFunction>& gs, bool& symmetric) {
    const int n = s.problem.n;
    SweepSetup S;
    S.nsets = 1 + int(gs.size());
    S.nwindows = int(windows.size());
    symmetric = symmetric_slice(s);
    std::map<std::int64_t, std::size_t> index;
    for (int w = 0; w < int(windows.size()); ++w) {
        for (std::int64_t h = std::max<std::int64_t>(windows[w].lo, 1); h <= windows[w].hi; ++h) {
            std::vector<std::pair<double, double>> ent;  // (offset, psi)
            for_each_in_shell(n, h, [&](const IVec& a) {
                double psi = psi_value(s.problem, a);
                if (symmetric) {
                    IVec a2 = a;
                    for (int i = 1; i < n; ++i) a2[i] = -a2[i];
                    if (psi_value(s.problem, a2) != psi) symmetric = false;
                }
                if (!(psi > 0.0)) return;
                const double beta = s.beta(a, 0);
                const double off = (a[0] > 0 ? frac(beta) : frac(-beta)) / double(h);
                ent.emplace_back(off, psi);
            });
            if (ent.empty()) continue;
            std::sort(ent.begin(), ent.end());
            ent.erase(std::unique(ent.begin(), ent.end()), ent.end());
            if (index.count(h)) throw std::invalid_argument("slice windows overlap");
            index[h] = S.fams.size();
            Family F;
            F.q = h;
            F.window = w;
            F.invq = 1.0 / double(h);
            for (auto& [o, p] : ent) {
                F.off.push_back(std::min(o, std::nextafter(F.invq, 0.0)));
                F.psi.push_back(p);
            }
            F.rad.assign(S.nsets, {});
            F.rmax.assign(S.nsets, 0.0);
            F.uniform.assign(S.nsets, 1);
            for (int k = 0; k < S.nsets; ++k) {
                auto& rv = F.rad[k];
                rv.resize(F.psi.size());
                for (std::size_t e = 0; e < F.psi.size(); ++e) {
                    double r = F.psi[e] / double(h);
                    rv[e] = k == 0 ? r : double(psi_tilde(F.psi[e], h, gs[k - 1], 1) / static_cast<long double>(h));
                    F.rmax[k] = std::max(F.rmax[k], rv[e]);
                    if (rv[e] != rv[0]) F.uniform[k] = 0;
                }
            }
            S.fams.push_back(std::move(F));
        }
    }
    S.half = symmetric;
    return S;
}

struct SliceRun {
    std::vector<double> deflated_union, deflated_content_flat;  // content: [window][g]
    std::vector<std::vector<double>> psi_union;                 // [g][window]
    std::vector<double> tail_union;                             // [g]
    std::int64_t balls = 0;
};

SliceRun run_exact_slice(const SliceSpec& s, const std::vector<Window>& windows,
                         const std::vector<DimensionFunction>& gs, int tail, std::int64_t budget) {
    bool symmetric = false;
    SweepSetup S = build_families(s, windows, gs, symmetric);
    const int W = int(windows.size());
    const int G = int(gs.size());
    std::vector<MergeState> states;
    // deflated cumulative states carry the g-contents
    for (int w = 0; w < W; ++w) {
        MergeState st;
        st.set = 0;
        st.wlo = 0;
        st.whi = w;
        for (const auto& g : gs) st.out.gs.push_back(&g);
        states.push_back(std::move(st));
    }
    for (int i = 0; i < G; ++i) {
        for (int w = 0; w < W; ++w) {
            MergeState st;
            st.set = 1 + i;
            st.wlo = 0;
            st.whi = w;
            states.push_back(std::move(st));
        }
        MergeState st;
        st.set = 1 + i;
        st.wlo = std::max(0, W - tail);
        st.whi = W - 1;
        states.push_back(std::move(st));
    }
    // the last cumulative state is the union of the tail and the windows before it
    if (W - tail >= 1) {
        for (int i = 0; i < G; ++i) {
            const std::size_t base = std::size_t(W) * (1 + i) + i;
            MergeState& last = states[base + W - 1];
            MergeState& tail_st = states[base + W];
            MergeState& head = states[base + W - tail - 1];
            last.wlo = 1;
            last.whi = 0;
            last.sources = {&tail_st, &head};
            tail_st.sinks.push_back(&last);
            head.sinks.push_back(&last);
        }
    }
    sweep(S, states, choose_cuts(S, budget));

    SliceRun run;
    for (const Family& F : S.fams) run.balls += std::int64_t(F.off.size()) * F.q;
    std::size_t idx = 0;
    run.deflated_content_flat.resize(std::size_t(W) * G);
    for (int w = 0; w < W; ++w, ++idx) {
        run.deflated_union.push_back(std::min(states[idx].out.length, 1.0));
        for (int i = 0; i < G; ++i) run.deflated_content_flat[std::size_t(w) * G + i] = states[idx].out.content[i];
    }
    run.psi_union.assign(G, {});
    for (int i = 0; i < G; ++i) {
        for (int w = 0; w < W; ++w, ++idx) run.psi_union[i].push_back(std::min(states[idx].out.length, 1.0));
        run.tail_union.push_back(std::min(states[idx].out.length, 1.0));
        ++idx;
    }
    return run;
}

// m >= 2: MC over the slice torus, first window hit per sample
struct McSliceRun {
    std::vector<std::vector<std::int64_t>> psi_hits;  // [g][window] cumulative
    std::vector<std::int64_t> tail_hits;              // [g]
    std::vector<std::int64_t> deflated_hits;
    std::vector<std::vector<double>> content;         // [window][g], no merging
    std::int64_t balls = 0;
};

McSliceRun run_mc_slice(const SliceSpec& s, const std::vector<Window>& windows,
                        const std::vector<DimensionFunction>& gs, int tail, std::int64_t samples,
                        std::uint64_t seed) {
    const int n = s.problem.n, m = s.problem.m;
    const int W = int(windows.size()), G = int(gs.size());
    struct Vec {
        int window;
        std::int64_t q;
        std::vector<double> beta;
        double psi;
        std::vector<double> tilde;  // |a_1| * inflated radius per g
    };
    std::vector<Vec> vecs;
    McSliceRun run;
    run.content.assign(W, std::vector<double>(G, 0.0));
    for (int w = 0; w < W; ++w) {
        for (std::int64_t h = std::max<std::int64_t>(windows[w].lo, 1); h <= windows[w].hi; ++h) {
            for_each_in_shell(n, h, [&](const IVec& a) {
                double psi = psi_value(s.problem, a);
                if (!(psi > 0.0)) return;
                Vec v;
                v.window = w;
                v.q = std::abs(a[0]);
                v.psi = psi;
                for (int j = 0; j < m; ++j) v.beta.push_back(s.beta(a, j));
                for (int i = 0; i < G; ++i) {
                    v.tilde.push_back(double(psi_tilde(psi, v.q, gs[i], m)));
                    run.content[w][i] += double(ipow(double(v.q), m)) * gs[i](psi / double(v.q));
                }
                run.balls += std::int64_t(ipow(double(v.q), m));
                vecs.push_back(std::move(v));
            });
        }
    }
    for (int w = 1; w < W; ++w)
        for (int i = 0; i < G; ++i) run.content[w][i] += run.content[w - 1][i];

    run.psi_hits.assign(G, std::vector<std::int64_t>(W, 0));
    run.tail_hits.assign(G, 0);
    run.deflated_hits.assign(W, 0);
    const int tail_lo = std::max(0, W - tail);
    std::vector<double> y(m);
    auto hit = [&](const Vec& v, double rad) {
        for (int j = 0; j < m; ++j)
            if (!(dist_nearest_int(double(v.q) * y[j] - v.beta[j]) < rad)) return false;
        return true;
    };
    for (std::int64_t t = 0; t < samples; ++t) {
        CounterRng rng(seed, std::uint64_t(t));
        for (auto& v : y) v = rng.uniform();
        int first_def = W;
        std::vector<int> first_psi(G, W);
        std::vector<char> tail_hit(G, 0);
        for (const Vec& v : vecs) {
            if (v.window < first_def && hit(v, v.psi)) first_def = v.window;
            for (int i = 0; i < G; ++i) {
                bool need = v.window < first_psi[i] || (v.window >= tail_lo && !tail_hit[i]);
                if (!need || !hit(v, v.tilde[i])) continue;
                first_psi[i] = std::min(first_psi[i], v.window);
                if (v.window >= tail_lo) tail_hit[i] = 1;
            }
        }
        for (int w = first_def; w < W; ++w) ++run.deflated_hits[w];
        for (int i = 0; i < G; ++i) {
            for (int w = first_psi[i]; w < W; ++w) ++run.psi_hits[i][w];
            if (tail_hit[i]) ++run.tail_hits[i];
        }
    }
    return run;
}

}  // namespace

namespace detail {
// exposed for the test suite: exact union lengths over cumulative windows with a given wide budget
std::vector<double> slice_union_profile(const SliceSpec& s, const std::vector<Window>& windows,
                                        const DimensionFunction& g, std::int64_t budget,
                                        std::vector<double>* deflated_content) {
    s.validate();
    if (s.problem.m != 1) throw std::invalid_argument("exact profile needs m = 1");
    SliceRun run = run_exact_slice(s, windows, {g}, 1, budget);
    if (deflated_content) *deflated_content = run.deflated_content_flat;
    return run.psi_union[0];
}
}  // namespace detail

std::vector<SlicePipelineReport> slice_to_hausdorff_pipelines(const LinearFormsProblem& p,
                                                              const std::vector<DimensionFunction>& fs,
                                                              const std::vector<std::vector<double>>& slices,
                                                              const std::vector<Window>& windows,
                                                              const SlicePipelineOptions& opt) {
    p.validate();
    if (windows.empty()) throw std::invalid_argument("slice pipeline needs at least one window");
    for (std::size_t w = 1; w < windows.size(); ++w)
        if (windows[w].lo <= windows[w - 1].hi) throw std::invalid_argument("slice windows must be disjoint and increasing");
    const int n = p.n, m = p.m;
    const int l = (n - 1) * m;
    std::vector<DimensionFunction> gs;
    for (const auto& f : fs) gs.push_back(derive_quotient(f, l));

    const int W = int(windows.size()), G = int(fs.size());
    const int tail = std::clamp(opt.tail_windows, 1, W);
    std::vector<SlicePipelineReport> reps(G);
    for (int i = 0; i < G; ++i) {
        reps[i].f = fs[i];
        reps[i].g = gs[i];
        reps[i].windows = windows;
        reps[i].slices.resize(slices.size());
        reps[i].collapse = fs[i].is_power(double(n * m));
    }

    parallel_for(slices.size(), opt.threads, [&](std::size_t si) {
        SliceSpec spec{p, slices[si]};
        spec.validate();
        if (m == 1) {
            SliceRun run = run_exact_slice(spec, windows, gs, tail, opt.wide_budget);
            for (int i = 0; i < G; ++i) {
                SliceReport& r = reps[i].slices[si];
                r.x0 = slices[si];
                r.exact = true;
                r.cumulative_union = run.psi_union[i];
                r.tail_union = run.tail_union[i];
                r.deflated_union = run.deflated_union;
                r.deflated_content.resize(W);
                for (int w = 0; w < W; ++w) r.deflated_content[w] = run.deflated_content_flat[std::size_t(w) * G + i];
                r.balls = run.balls;
            }
        } else {
            McSliceRun run = run_mc_slice(spec, windows, gs, tail, opt.samples, opt.seed + si);
            for (int i = 0; i < G; ++i) {
                SliceReport& r = reps[i].slices[si];
                r.x0 = slices[si];
                r.exact = false;
                for (int w = 0; w < W; ++w) {
                    r.cumulative_union.push_back(double(run.psi_hits[i][w]) / double(opt.samples));
                    r.union_ci.push_back(wilson95(run.psi_hits[i][w], opt.samples));
                    r.deflated_union.push_back(double(run.deflated_hits[w]) / double(opt.samples));
                    r.deflated_content.push_back(run.content[w][i]);
                }
                r.tail_union = double(run.tail_hits[i]) / double(opt.samples);
                r.balls = run.balls;
            }
        }
    });

    for (int i = 0; i < G; ++i) {
        auto& rep = reps[i];
        for (auto& r : rep.slices) {
            bool inc = true;
            for (int w = W - tail + 1; w < W; ++w) inc = inc && r.deflated_content[w] > r.deflated_content[w - 1];
            r.content_increasing = inc && tail >= 2;
            if (!r.cumulative_union.empty() && r.cumulative_union.back() > opt.full_threshold) ++rep.slices_full;
            if (r.content_increasing) ++rep.slices_content_increasing;
            rep.max_tail_union = std::max(rep.max_tail_union, r.tail_union);
        }
        // Psi~ in closed form for power laws on Z_1
        const auto& f = fs[i];
        if (p.psi.law == PsiSpec::Law::Power && f.kind() == DimensionFunction::Kind::PowerLaw) {
            double tt = (p.psi.tau + 1.0) * (f.s() - l) / m - 1.0;
            rep.psi_tilde_law = "|a|^-" + fmt_double(tt);
            LinearFormsProblem q = p;
            q.psi.tau = tt;
            q.psi.support = Support{};
            q.psi.support.zi = {1};
            // the Z_1 support takes the enumerating path, so cap the shell work
            std::int64_t H = 64, work = 0;
            while (H < (std::int64_t(1) << 20)) {
                work = 0;
                for (std::int64_t h = 1; h <= 2 * H; ++h) work += shell_size(n, h);
                if (work > 20000000) break;
                H *= 2;
            }
            rep.psi_tilde_series = classify(schmidt_sum(q, H, opt.threads));
            rep.series_available = true;
        }
        if (m > 1) rep.note = "m >= 2: unions by Monte Carlo; content sums g over balls without merging";
    }
    return reps;
}

SlicePipelineReport slice_to_hausdorff_pipeline(const LinearFormsProblem& p, const DimensionFunction& f,
                                                const std::vector<std::vector<double>>& slices,
                                                const std::vector<Window>& windows,
                                                const SlicePipelineOptions& opt) {
    return slice_to_hausdorff_pipelines(p, {f}, slices, windows, opt).front();
}

// ---------------------------------------------------------------------------
// Slicing inequality on box unions.

double unit_ball_volume(int l) {
    return std::pow(std::numbers::pi, 0.5 * l) / std::tgamma(0.5 * l + 1.0);
}

namespace {

// Union count of integer boxes [lo, hi) (half-open index ranges) in e dimensions.
std::int64_t union_cell_count(const std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>>& boxes,
                              int e) {
    if (boxes.empty()) return 0;
    if (e == 0) return 1;
    std::vector<std::vector<std::int64_t>> cuts(e);
    for (const auto& b : boxes)
        for (int d = 0; d < e; ++d) {
            cuts[d].push_back(b[d].first);
            cuts[d].push_back(b[d].second);
        }
    std::vector<std::size_t> dims(e);
    std::size_t total = 1;
    for (int d = 0; d < e; ++d) {
        std::sort(cuts[d].begin(), cuts[d].end());
        cuts[d].erase(std::unique(cuts[d].begin(), cuts[d].end()), cuts[d].end());
        dims[d] = cuts[d].size() > 1 ? cuts[d].size() - 1 : 0;
        total *= dims[d];
    }
    if (total == 0) return 0;
    std::vector<char> mark(total, 0);
    for (const auto& b : boxes) {
        std::vector<std::size_t> lo(e), hi(e);
        bool empty = false;
        for (int d = 0; d < e; ++d) {
            lo[d] = std::size_t(std::lower_bound(cuts[d].begin(), cuts[d].end(), b[d].first) - cuts[d].begin());
            hi[d] = std::size_t(std::lower_bound(cuts[d].begin(), cuts[d].end(), b[d].second) - cuts[d].begin());
            if (lo[d] >= hi[d]) empty = true;
        }
        if (empty) continue;
        std::vector<std::size_t> idx = lo;
        while (true) {
            std::size_t flat = 0;
            for (int d = 0; d < e; ++d) flat = flat * dims[d] + idx[d];
            mark[flat] = 1;
            int d = e - 1;
            while (d >= 0 && ++idx[d] == hi[d]) idx[d] = lo[d], --d;
            if (d < 0) break;
        }
    }
    std::int64_t count = 0;
    std::vector<std::size_t> idx(e, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        if (mark[flat]) {
            std::size_t rem = flat;
            std::int64_t vol = 1;
            for (int d = e - 1; d >= 0; --d) {
                std::size_t i = rem % dims[d];
                rem /= dims[d];
                vol *= cuts[d][i + 1] - cuts[d][i];
            }
            count += vol;
        }
    }
    return count;
}

struct PlaneGroups {
    int e = 0;  // largest effective dimension
    // key: fixed coordinates of degenerate sides, value: boxes restricted to the free sides
    std::map<std::vector<std::pair<int, double>>, std::vector<Box>> groups;
};

PlaneGroups top_dimensional(const std::vector<Box>& boxes, int dim) {
    PlaneGroups pg;
    pg.e = -1;
    for (const auto& b : boxes) {
        int e = 0;
        for (int d = 0; d < dim; ++d) e += b.hi[d] > b.lo[d];
        pg.e = std::max(pg.e, e);
    }
    for (const auto& b : boxes) {
        int e = 0;
        for (int d = 0; d < dim; ++d) e += b.hi[d] > b.lo[d];
        if (e != pg.e) continue;
        std::vector<std::pair<int, double>> key;
        Box free;
        for (int d = 0; d < dim; ++d) {
            if (b.hi[d] > b.lo[d]) {
                free.lo.push_back(b.lo[d]);
                free.hi.push_back(b.hi[d]);
            } else {
                key.emplace_back(d, b.lo[d]);
            }
        }
        pg.groups[key].push_back(free);
    }
    return pg;
}

// grid cells of pitch c: closed cells covering the box, or lying inside it
std::int64_t cell_count(const std::vector<Box>& boxes, int e, double c, bool inside) {
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> ib;
    for (const auto& b : boxes) {
        std::vector<std::pair<std::int64_t, std::int64_t>> r(e);
        for (int d = 0; d < e; ++d) {
            double lo = b.lo[d] / c, hi = b.hi[d] / c;
            if (inside)
                r[d] = {std::int64_t(std::ceil(lo)), std::int64_t(std::floor(hi))};
            else {
                auto a = std::int64_t(std::floor(lo));
                r[d] = {a, std::max(std::int64_t(std::ceil(hi)), a + 1)};
            }
        }
        ib.push_back(std::move(r));
    }
    return union_cell_count(ib, e);
}

// upper bound for H^t of a box union in R^d (t = exponent of a power law)
double hausdorff_upper(const std::vector<Box>& boxes, int d, double t, double c) {
    if (boxes.empty()) return 0.0;
    PlaneGroups pg = top_dimensional(boxes, d);
    const int e = pg.e;
    if (t > e) return 0.0;
    if (t < e) return kInf;
    if (e == 0) return double(pg.groups.size());
    // every pitch-c cube sits in a Euclidean ball of radius c sqrt(e) / 2
    const double r = 0.5 * c * std::sqrt(double(e));
    double total = 0.0;
    for (const auto& [key, bx] : pg.groups) total += double(cell_count(bx, e, c, false)) * std::pow(r, t);
    return total;
}

// lower bound for H^s of a box union in R^k
double hausdorff_lower(const std::vector<Box>& boxes, int k, double s, double c) {
    if (boxes.empty()) return 0.0;
    PlaneGroups pg = top_dimensional(boxes, k);
    const int e = pg.e;
    if (s > e) return 0.0;
    if (s < e) return kInf;
    if (e == 0) return double(pg.groups.size());
    // a ball of radius r meets an e-plane in at most alpha(e) r^e of volume
    double total = 0.0;
    for (const auto& [key, bx] : pg.groups)
        total += double(cell_count(bx, e, c, true)) * std::pow(c, e) / unit_ball_volume(e);
    return total;
}

}  // namespace

SlicingCheck slicing_inequality_check(const ProductSet& A, const DimensionFunction& f, int l,
                                      const SlicingCheckOptions& opt) {
    const int k = A.k;
    if (k < 1 || l < 1 || l > k) throw std::invalid_argument("slicing check needs 1 <= l <= k");
    for (const auto& b : A.boxes) {
        if (int(b.lo.size()) != k || int(b.hi.size()) != k)
            throw std::invalid_argument("unsupported set: box dimension mismatch");
        for (int d = 0; d < k; ++d)
            if (!std::isfinite(b.lo[d]) || !std::isfinite(b.hi[d]) || b.lo[d] > b.hi[d])
                throw std::invalid_argument("unsupported set: malformed box");
    }
    DimensionFunction g = derive_quotient(f, l);
    SlicingCheck out;
    out.level = opt.level;
    if (f.kind() != DimensionFunction::Kind::PowerLaw) {
        out.abstained = true;
        out.note = "bounds implemented for power laws only";
        return out;
    }
    const double s = f.s(), t = g.s();
    const double c = std::ldexp(1.0, -opt.level);
    const int d = k - l;

    // slices are constant on the cells cut out by the projected box faces
    std::vector<const Box*> thick;
    for (const auto& b : A.boxes) {
        bool ok = true;
        for (int i = d; i < k; ++i) ok = ok && b.hi[i] > b.lo[i];
        if (ok) thick.push_back(&b);
    }
    double lhs = 0.0;
    if (!thick.empty()) {
        std::vector<std::vector<double>> cuts(l);
        for (const Box* b : thick)
            for (int i = 0; i < l; ++i) {
                cuts[i].push_back(b->lo[d + i]);
                cuts[i].push_back(b->hi[d + i]);
            }
        for (auto& v : cuts) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        std::vector<std::size_t> idx(l, 0);
        bool done = false;
        while (!done) {
            double vol = 1.0;
            std::vector<double> mid(l);
            for (int i = 0; i < l; ++i) {
                vol *= cuts[i][idx[i] + 1] - cuts[i][idx[i]];
                mid[i] = 0.5 * (cuts[i][idx[i] + 1] + cuts[i][idx[i]]);
            }
            std::vector<Box> slice;
            for (const Box* b : thick) {
                bool in = true;
                for (int i = 0; i < l && in; ++i) in = b->lo[d + i] <= mid[i] && mid[i] <= b->hi[d + i];
                if (!in) continue;
                Box sb;
                sb.lo.assign(b->lo.begin(), b->lo.begin() + d);
                sb.hi.assign(b->hi.begin(), b->hi.begin() + d);
                slice.push_back(std::move(sb));
            }
            double hu = hausdorff_upper(slice, d, t, c);
            if (vol > 0.0 && hu > 0.0) lhs += vol * hu;
            int i = l - 1;
            while (i >= 0 && ++idx[i] + 1 >= cuts[i].size()) idx[i] = 0, --i;
            if (i < 0) done = true;
        }
    }
    double hf = hausdorff_lower(A.boxes, k, s, c);
    double rhs = hf == kInf ? kInf : unit_ball_volume(l) * std::ldexp(1.0, l) * hf;
    out.lhs_upper = lhs;
    out.rhs_lower = rhs;
    if (lhs == kInf)
        out.holds = rhs == kInf;
    else
        out.holds = lhs <= rhs * (1.0 + opt.tol);
    if (!out.holds) {
        out.abstained = true;
        out.note = "bounds do not separate at this resolution";
    }
    return out;
}

}  // namespace diolab
