#include "diolab/geometry.hpp"

#include "diolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diolab {

Point::Point(int n_, int m_, std::vector<double> v) : n(n_), m(m_), x(std::move(v)) {
    if (x.size() != std::size_t(n) * m) throw std::invalid_argument("point has wrong number of coordinates");
}

std::vector<double> ResonantPlane::coeffs() const {
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        c[i] = kind == Kind::Squared ? double(a[i]) * double(a[i]) : double(a[i]);
    return c;
}

double ResonantPlane::value(int j) const {
    double bj = b.empty() ? 0.0 : b.at(j);
    double pj = double(p.at(j));
    return bj + (kind == Kind::Squared ? pj * pj : pj);
}

void ResonantPlane::validate() const {
    if (sup_norm(a) == 0) throw std::invalid_argument("resonant plane needs a != 0");
    if (kind == Kind::Squared && (a.size() != 2 || p.size() != 1))
        throw std::invalid_argument("squared planes live in n = 2, m = 1");
    if (!b.empty() && b.size() != p.size()) throw std::invalid_argument("b and p disagree in length");
}

namespace {

double dot_col(const Point& X, const IVec& a, int j) {
    double s = 0.0;
    for (int i = 0; i < X.n; ++i) s += double(a[i]) * X.at(i, j);
    return s;
}

}  // namespace

double form_residual(const Point& X, const IVec& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (int j = 0; j < X.m; ++j) worst = std::max(worst, dist_nearest_int(dot_col(X, a, j) - b[j]));
    return worst;
}

bool satisfies(const Point& X, const IVec& a, const LinearFormsProblem& p) {
    double psi = psi_value(p, a);
    for (int j = 0; j < X.m; ++j)
        if (!(dist_nearest_int(dot_col(X, a, j) - p.b[j]) < psi)) return false;
    return true;
}

bool neighborhood_membership(const Point& X, const Neighborhood& nb) {
    if (!(nb.delta > 0.0)) return false;
    const bool sq = nb.plane.kind == ResonantPlane::Kind::Squared;
    auto coef = [&](int i) {
        double v = double(nb.plane.a[i]);
        return sq ? v * v : v;
    };
    double norm = 0.0;
    for (int i = 0; i < X.n; ++i) norm += coef(i) * coef(i);
    norm = std::sqrt(norm);
    for (int j = 0; j < X.m; ++j) {
        double bj = nb.plane.b.empty() ? 0.0 : nb.plane.b[j];
        double pj = double(nb.plane.p[j]);
        if (sq) pj *= pj;
        double dot = 0.0;
        for (int i = 0; i < X.n; ++i) dot += coef(i) * X.at(i, j);
        double num = (dot - bj) - pj;
        if (!(std::abs(num) / norm < nb.delta)) return false;
    }
    return true;
}

std::int64_t ShiftRange::count() const {
    std::int64_t c = 1;
    for (auto [lo, hi] : ranges) c *= std::max<std::int64_t>(0, hi - lo + 1);
    return c;
}

void ShiftRange::for_each(const std::function<void(const IVec&)>& fn) const {
    if (count() == 0) return;
    IVec p(ranges.size());
    for (std::size_t j = 0; j < ranges.size(); ++j) p[j] = ranges[j].first;
    for (;;) {
        fn(p);
        std::size_t j = 0;
        while (j < p.size()) {
            if (p[j] < ranges[j].second) {
                ++p[j];
                break;
            }
            p[j] = ranges[j].first;
            ++j;
        }
        if (j == p.size()) return;
    }
}

double shift_constant(int n, int m) { return std::pow(double(n) + 3.0, m); }

ShiftRange relevant_shifts(const IVec& a, const std::vector<double>& b, double delta) {
    if (sup_norm(a) == 0) throw std::invalid_argument("relevant_shifts needs a != 0");
    double lo_dot = 0.0, hi_dot = 0.0, aa = 0.0;
    for (auto v : a) {
        lo_dot += std::min<double>(double(v), 0.0);
        hi_dot += std::max<double>(double(v), 0.0);
        aa += double(v) * double(v);
    }
    double w = delta * std::sqrt(aa);
    ShiftRange out;
    for (double bj : b) {
        double lo = lo_dot - bj - w, hi = hi_dot - bj + w;
        std::int64_t plo, phi;
        if (w > 0.0) {
            // integers strictly inside (lo, hi)
            plo = std::int64_t(std::floor(lo)) + 1;
            phi = std::int64_t(std::ceil(hi)) - 1;
        } else {
            plo = std::int64_t(std::ceil(lo));
            phi = std::int64_t(std::floor(hi));
        }
        out.ranges.emplace_back(plo, phi);
    }
    out.certified_constant = shift_constant(int(a.size()), int(b.size()));
    return out;
}

bool equivalence_check(const Point& X, const LinearFormsProblem& p, std::int64_t H) {
    bool ok = true;
    for (std::int64_t h = 1; h <= H && ok; ++h) {
        for_each_in_shell(p.n, h, [&](const IVec& a) {
            if (!ok) return;
            double psi = psi_value(p, a);
            double aa = 0.0;
            for (auto v : a) aa += double(v) * double(v);
            Neighborhood nb{{a, IVec(p.m, 0), p.b, ResonantPlane::Kind::Linear}, psi / std::sqrt(aa)};
            bool lhs = satisfies(X, a, p);
            bool rhs = false;
            // forms are independent: a shift vector exists iff each p_j exists
            ShiftRange sr = relevant_shifts(a, p.b, nb.delta);
            if (sr.count() > 0) {
                rhs = true;
                Point col(p.n, 1);
                Neighborhood one{{a, IVec{0}, {0.0}, ResonantPlane::Kind::Linear}, nb.delta};
                for (int j = 0; j < p.m && rhs; ++j) {
                    for (int i = 0; i < p.n; ++i) col.at(i, 0) = X.at(i, j);
                    one.plane.b[0] = p.b[j];
                    bool found = false;
                    for (auto pj = sr.ranges[j].first; pj <= sr.ranges[j].second && !found; ++pj) {
                        one.plane.p[0] = pj;
                        found = neighborhood_membership(col, one);
                    }
                    rhs = found;
                }
            }
            if (lhs != rhs) ok = false;
        });
    }
    return ok;
}

std::vector<IVec> hit_list(const Point& X, const LinearFormsProblem& p, std::int64_t H1, std::int64_t H2,
                           int threads) {
    if (H1 > H2) throw std::invalid_argument("hit_list needs H1 <= H2");
    H1 = std::max<std::int64_t>(H1, 1);
    if (H2 < H1) return {};
    std::vector<std::vector<IVec>> per(std::size_t(H2 - H1 + 1));
    parallel_for(per.size(), threads, [&](std::size_t k) {
        std::int64_t h = H1 + std::int64_t(k);
        for_each_in_shell(p.n, h, [&](const IVec& a) {
            if (psi_value(p, a) > 0.0 && satisfies(X, a, p)) per[k].push_back(a);
        });
    });
    std::vector<IVec> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}

double cover_constant(int n, int m) {
    if (n == 1) return 1.0;
    return std::pow((double(n) + 3.0) * std::pow(2.0, n - 1), m);
}

namespace {

struct Slab {
    std::vector<double> c;  // coefficients
    double center;          // c.x = center is the plane
    double half;            // open half-width in value units
    int k;                  // coordinate with the largest |c_k|
};

std::vector<Slab> slabs_of(const Neighborhood& nb) {
    auto c = nb.plane.coeffs();
    double norm = 0.0;
    for (double v : c) norm += v * v;
    norm = std::sqrt(norm);
    int k = 0;
    for (int i = 1; i < int(c.size()); ++i)
        if (std::abs(c[i]) > std::abs(c[k])) k = i;
    std::vector<Slab> out;
    for (std::size_t j = 0; j < nb.plane.p.size(); ++j) out.push_back({c, nb.plane.value(int(j)), nb.delta * norm, k});
    return out;
}

std::int64_t grid_cells(double r) { return std::max<std::int64_t>(1, std::int64_t(std::ceil((1.0 / r) * (1.0 - 1e-12)))); }

// range of c.x over the closed grid cell idx; shared by the cover and its oracle so
// that cells touching the slab only at a boundary tie are classified identically
std::pair<double, double> cell_value_range(const std::vector<double>& c, const IVec& idx, double r) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double x0 = double(idx[i]) * r, x1 = std::min(1.0, double(idx[i] + 1) * r);
        lo += std::min(c[i] * x0, c[i] * x1);
        hi += std::max(c[i] * x0, c[i] * x1);
    }
    return {lo, hi};
}

bool cell_meets(const std::vector<double>& c, const IVec& idx, double r, double center, double half) {
    auto [lo, hi] = cell_value_range(c, idx, r);
    return lo < center + half && hi > center - half;
}

// cells along axis k (pitch r, N cells) meeting the open interval (lo, hi)
std::pair<std::int64_t, std::int64_t> cell_span(double lo, double hi, double r, std::int64_t N) {
    std::int64_t u0 = std::int64_t(std::floor(lo / r));
    std::int64_t u1 = std::int64_t(std::ceil(hi / r)) - 1;
    return {std::max<std::int64_t>(u0, 0), std::min<std::int64_t>(u1, N - 1)};
}

// For each tangential cell of one slab, the x_k cell span. Calls fn(tangential index vector, u0, u1).
template <class Fn>
void scan_slab(const Slab& s, int n, double r, std::int64_t N, Fn&& fn) {
    IVec t(n, 0);
    std::vector<int> axes;
    for (int i = 0; i < n; ++i)
        if (i != s.k) axes.push_back(i);
    auto rec = [&](auto&& self, std::size_t d) -> void {
        if (d == axes.size()) {
            double tmin = 0.0, tmax = 0.0;
            for (int i : axes) {
                double x0 = double(t[i]) * r, x1 = std::min(1.0, double(t[i] + 1) * r);
                double v0 = s.c[i] * x0, v1 = s.c[i] * x1;
                tmin += std::min(v0, v1);
                tmax += std::max(v0, v1);
            }
            double ck = s.c[s.k];
            double lo = (s.center - s.half - tmax) / ck, hi = (s.center + s.half - tmin) / ck;
            if (ck < 0) std::swap(lo, hi);
            if (!(lo < hi) || !(lo < 1.0) || !(hi > 0.0)) return;
            auto [u0, u1] = cell_span(lo, hi, r, N);
            // settle boundary ties with the cell predicate
            IVec cell = t;
            auto meets = [&](std::int64_t u) {
                cell[s.k] = u;
                return cell_meets(s.c, cell, r, s.center, s.half);
            };
            u0 = std::max<std::int64_t>(u0, 0);
            u1 = std::min<std::int64_t>(u1, N - 1);
            while (u0 > 0 && meets(u0 - 1)) --u0;
            while (u0 <= u1 && !meets(u0)) ++u0;
            while (u1 < N - 1 && meets(u1 + 1)) ++u1;
            while (u1 >= u0 && !meets(u1)) --u1;
            if (u0 <= u1) fn(t, u0, u1);
            return;
        }
        for (std::int64_t v = 0; v < N; ++v) {
            t[axes[d]] = v;
            self(self, d + 1);
        }
    };
    rec(rec, 0);
}

}  // namespace

CoverReport cover_neighborhood(const Neighborhood& nb, double r, bool keep_cells) {
    if (!(r > 0.0)) throw std::domain_error("cover radius must be positive");
    nb.plane.validate();
    const int n = int(nb.plane.a.size()), m = int(nb.plane.p.size());
    CoverReport rep;
    rep.r = r;
    rep.certified_constant = cover_constant(n, m);
    if (!(nb.delta > 0.0)) {
        rep.count = 0;
        return rep;
    }
    double hA = double(sup_norm(nb.plane.a));
    double aa = 0.0;
    for (double v : nb.plane.coeffs()) aa += v * v;
    double psi = nb.delta * std::sqrt(aa);
    if (nb.plane.kind == ResonantPlane::Kind::Squared) hA = hA * hA;
    rep.bound = rep.certified_constant * std::pow(hA / psi, double((n - 1) * m));

    auto slabs = slabs_of(nb);
    if (n == 1) {
        // one interval of radius psi/|a| per form: a single sup-norm ball
        rep.single_ball = true;
        for (auto& s : slabs) rep.ball_center.push_back(s.center / s.c[0]);
        rep.count = 1;
        rep.within_bound = rep.count <= rep.bound;
        return rep;
    }
    const std::int64_t N = grid_cells(r);
    rep.count = 1;
    for (auto& s : slabs) {
        std::int64_t cnt = 0;
        std::vector<IVec> cells;
        scan_slab(s, n, r, N, [&](const IVec& t, std::int64_t u0, std::int64_t u1) {
            cnt += u1 - u0 + 1;
            if (keep_cells)
                for (auto u = u0; u <= u1; ++u) {
                    IVec cell = t;
                    cell[s.k] = u;
                    cells.push_back(cell);
                }
        });
        rep.count *= cnt;
        if (keep_cells) {
            std::sort(cells.begin(), cells.end());
            rep.cells.push_back(std::move(cells));
        }
    }
    rep.within_bound = double(rep.count) <= rep.bound * (1.0 + 1e-12);
    return rep;
}

bool cover_contains(const CoverReport& cover, const Neighborhood& nb, const Point& X) {
    const int n = X.n;
    if (cover.single_ball) {
        for (int j = 0; j < X.m; ++j)
            if (std::abs(X.at(0, j) - cover.ball_center[j]) > cover.r) return false;
        return true;
    }
    (void)nb;
    if (cover.cells.size() != std::size_t(X.m)) throw std::invalid_argument("cover was built without cells");
    for (int j = 0; j < X.m; ++j) {
        // the point lies in the closed cell it indexes, or on a shared face
        IVec base(n);
        for (int i = 0; i < n; ++i) base[i] = std::int64_t(std::floor(X.at(i, j) / cover.r));
        bool found = false;
        for (int mask = 0; mask < (1 << n) && !found; ++mask) {
            IVec cell = base;
            bool valid = true;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) {
                    if (X.at(i, j) != double(base[i]) * cover.r) valid = false;
                    cell[i] -= 1;
                }
            if (valid) found = std::binary_search(cover.cells[j].begin(), cover.cells[j].end(), cell);
        }
        if (!found) return false;
    }
    return true;
}

std::int64_t brute_force_cover_count(const Neighborhood& nb, double r) {
    const int n = int(nb.plane.a.size());
    if (!(nb.delta > 0.0)) return 0;
    const std::int64_t N = grid_cells(r);
    auto c = nb.plane.coeffs();
    double norm = 0.0;
    for (double v : c) norm += v * v;
    double half = nb.delta * std::sqrt(norm);
    std::int64_t total = 1;
    for (std::size_t j = 0; j < nb.plane.p.size(); ++j) {
        double center = nb.plane.value(int(j));
        std::int64_t cnt = 0;
        IVec idx(n, 0);
        for (;;) {
            if (cell_meets(c, idx, r, center, half)) ++cnt;
            int d = 0;
            while (d < n && ++idx[d] == N) idx[d++] = 0;
            if (d == n) break;
        }
        total *= cnt;
    }
    return total;
}

}  // namespace diolab
