#include "diolab/series.hpp"

#include "diolab/parallel.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace diolab {

std::vector<std::int64_t> dyadic_checkpoints(std::int64_t H) {
    std::vector<std::int64_t> out;
    for (std::int64_t h = 1; h <= H; h *= 2) out.push_back(h);
    if (out.empty() || out.back() != H) out.push_back(H);
    return out;
}

namespace {

using Term = std::function<double(double psi, std::int64_t h)>;

// Per-shell aggregates reduced in shell order; every criterion over
// LinearFormsProblem goes through here so equal terms give equal sums.
PartialSumSeries criterion_sum(const LinearFormsProblem& p, std::int64_t H, const Term& term, std::string label,
                               int threads) {
    if (H < 1) throw std::invalid_argument("H must be >= 1");
    p.validate();
    std::vector<double> shell(H + 1, 0.0);
    const bool radial = p.psi.radial() && p.psi.support.is_all();

    if (p.psi.law == PsiSpec::Law::Table) {
        std::vector<NeumaierSum> acc(H + 1);
        for (auto& [a, v] : p.psi.table) {
            auto h = sup_norm(a);
            if (h > H || !(v > 0.0) || !p.psi.support.contains(a)) continue;
            acc[h].add(term(v, h));
        }
        for (std::int64_t h = 1; h <= H; ++h) shell[h] = acc[h].value();
    } else if (radial) {
        parallel_for(std::size_t(H), threads, [&](std::size_t i) {
            std::int64_t h = std::int64_t(i) + 1;
            double psi = p.psi.raw(IVec(p.n, h));
            shell[h] = psi > 0.0 ? double(shell_size(p.n, h)) * term(psi, h) : 0.0;
        });
    } else {
        parallel_for(std::size_t(H), threads, [&](std::size_t i) {
            std::int64_t h = std::int64_t(i) + 1;
            NeumaierSum acc;
            std::int64_t visited = 0;
            for_each_in_shell(p.n, h, [&](const IVec& a) {
                ++visited;
                double psi = psi_value(p, a);
                if (psi > 0.0) acc.add(term(psi, h));
            });
            if (visited != shell_size(p.n, h))
                throw std::logic_error("shell enumeration count mismatch at h=" + std::to_string(h));
            shell[h] = acc.value();
        });
    }

    PartialSumSeries out;
    out.label = std::move(label);
    auto cps = dyadic_checkpoints(H);
    std::size_t next = 0;
    NeumaierSum total, window;
    for (std::int64_t h = 1; h <= H; ++h) {
        total.add(shell[h]);
        window.add(shell[h]);
        if (next < cps.size() && cps[next] == h) {
            out.heights.push_back(h);
            out.sums.push_back(total.value());
            out.increments.push_back(window.value());
            window = NeumaierSum{};
            ++next;
        }
    }
    return out;
}

}  // namespace

PartialSumSeries schmidt_sum(const LinearFormsProblem& p, std::int64_t H, int threads) {
    const int m = p.m;
    return criterion_sum(p, H, [m](double psi, std::int64_t) { return ipow(psi, m); }, "Schmidt", threads);
}

PartialSumSeries hausdorff_sum(const LinearFormsProblem& p, const DimensionFunction& f, std::int64_t H,
                               int threads) {
    const int m = p.m;
    DimensionFunction g = derive_quotient(f, (p.n - 1) * p.m);
    Term term;
    if (g.is_power(double(m))) {
        // g(r) = r^m: g(Psi/|a|) |a|^m is Psi^m
        term = [m](double psi, std::int64_t) { return ipow(psi, m); };
    } else {
        term = [g, m](double psi, std::int64_t h) {
            double hd = double(h);
            return g(psi / hd) * ipow(hd, m);
        };
    }
    return criterion_sum(p, H, term, "Hausdorff(" + to_string(f) + ")", threads);
}

PartialSumSeries corollary_one_sum(const LinearFormsProblem& p, double s, std::int64_t H, int threads) {
    double delta = s - double((p.n - 1) * p.m);
    double e = double(p.n * p.m) - s;
    return criterion_sum(
        p, H, [delta, e](double psi, std::int64_t h) { return std::pow(psi, delta) * std::pow(double(h), e); },
        "CorollaryOne(" + fmt_double(s) + ")", threads);
}

namespace {

PartialSumSeries scalar_sum(std::int64_t H, const std::function<double(std::int64_t)>& term, std::string label) {
    if (H < 1) throw std::invalid_argument("H must be >= 1");
    PartialSumSeries out;
    out.label = std::move(label);
    auto cps = dyadic_checkpoints(H);
    std::size_t next = 0;
    NeumaierSum total, window;
    for (std::int64_t h = 1; h <= H; ++h) {
        double t = term(h);
        total.add(t);
        window.add(t);
        if (next < cps.size() && cps[next] == h) {
            out.heights.push_back(h);
            out.sums.push_back(total.value());
            out.increments.push_back(window.value());
            window = NeumaierSum{};
            ++next;
        }
    }
    return out;
}

}  // namespace

PartialSumSeries squares_sum(const SquaresProblem& sp, const DimensionFunction& f, std::int64_t H) {
    sp.validate();
    DimensionFunction g = derive_quotient(f, 1);
    return scalar_sum(
        H,
        [&](std::int64_t h) {
            double psi = sp.psi(h);
            if (!(psi > 0.0)) return 0.0;
            double h2 = double(h) * double(h);
            return g(psi / h2) * h2;
        },
        "Squares(" + to_string(f) + ")");
}

PartialSumSeries squares_corollary_sum(const SquaresProblem& sp, double s, std::int64_t H) {
    sp.validate();
    return scalar_sum(
        H,
        [&](std::int64_t h) {
            double psi = sp.psi(h);
            if (!(psi > 0.0)) return 0.0;
            return std::pow(psi, s - 1.0) * std::pow(double(h), 4.0 - 2.0 * s);
        },
        "SquaresCorollary(" + fmt_double(s) + ")");
}

double schmidt_window(const LinearFormsProblem& p, std::int64_t lo, std::int64_t hi) {
    NeumaierSum acc;
    if (p.psi.law == PsiSpec::Law::Table) {
        for (auto& [a, v] : p.psi.table) {
            auto h = sup_norm(a);
            if (h >= lo && h < hi && v > 0.0 && p.psi.support.contains(a)) acc.add(ipow(v, p.m));
        }
        return acc.value();
    }
    for (std::int64_t h = std::max<std::int64_t>(lo, 1); h < hi; ++h) {
        if (p.psi.support.is_all()) {
            acc.add(double(shell_size(p.n, h)) * ipow(p.psi.raw(IVec(p.n, h)), p.m));
        } else {
            for_each_in_shell(p.n, h, [&](const IVec& a) { acc.add(ipow(psi_value(p, a), p.m)); });
        }
    }
    return acc.value();
}

std::string to_string(Classification::Verdict v) {
    switch (v) {
        case Classification::Verdict::Converges: return "Converges";
        case Classification::Verdict::Diverges: return "Diverges";
        case Classification::Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.residual = x.size() > 2 ? std::sqrt(ss / (n - 2.0)) : 0.0;
    return f;
}

// least squares for y = c + b x + g z, returns g
double fit_gamma(const std::vector<double>& x, const std::vector<double>& z, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, mz = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        mz += z[i];
        my += y[i];
    }
    mx /= n;
    mz /= n;
    my /= n;
    double sxx = 0, szz = 0, sxz = 0, sxy = 0, szy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dz = z[i] - mz, dy = y[i] - my;
        sxx += dx * dx;
        szz += dz * dz;
        sxz += dx * dz;
        sxy += dx * dy;
        szy += dz * dy;
    }
    double det = sxx * szz - sxz * sxz;
    if (std::abs(det) < 1e-14 * (sxx * szz + 1e-300)) return 0.0;
    return (sxx * szy - sxz * sxy) / det;
}

double tail_limit(double s_last, double d_last, double beta, double ratio) {
    double q = std::pow(ratio, beta);
    return s_last + d_last * q / (1.0 - q);
}

}  // namespace

Classification classify(const PartialSumSeries& series, const ClassifyOptions& opt) {
    const auto& H = series.heights;
    const auto& S = series.sums;
    if (!series.increments.empty() && series.increments.size() != S.size())
        throw std::invalid_argument("increments and sums differ in length");
    if (H.size() != S.size() || H.size() < 8 || double(H.back()) < 100.0 * double(H.front()))
        throw std::invalid_argument("classify needs >= 8 checkpoints spanning >= 2 decades");

    Classification c;
    using V = Classification::Verdict;
    for (std::size_t i = 1; i < S.size(); ++i)
        if (S[i] < S[i - 1]) throw std::logic_error("partial sums decrease");

    if (S.back() == 0.0) {
        c.verdict = V::Converges;
        c.note = "identically zero";
        return c;
    }

    // window increments between consecutive dyadic checkpoints
    auto incr = [&](std::size_t k) { return series.increments.empty() ? S[k] - S[k - 1] : series.increments[k]; };
    std::vector<double> x, y, z, d;
    std::size_t K = S.size() - 1;
    std::size_t tail = std::max<std::size_t>(4, (K + 1) / 2);
    std::size_t first = K >= tail ? K - tail + 1 : 1;
    bool trailing_zero = incr(K) == 0.0 && incr(K - 1) == 0.0;
    if (trailing_zero) {
        c.verdict = V::Converges;
        c.limit = S.back();
        c.note = "increments vanish (finite support)";
        return c;
    }
    for (std::size_t k = first; k <= K; ++k) {
        double inc = incr(k);
        if (!(inc > 0.0)) continue;
        double lh = std::log(double(H[k]));
        x.push_back(lh);
        z.push_back(std::log(lh));
        y.push_back(std::log(inc));
        d.push_back(inc);
    }
    if (x.size() < 3) {
        c.note = "too few positive increments in the tail";
        return c;
    }
    LineFit lf = fit_line(x, y);
    c.beta = lf.slope;
    // jackknife standard error of the slope
    {
        std::vector<double> loo;
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> xs, ys;
            for (std::size_t j = 0; j < x.size(); ++j)
                if (j != i) {
                    xs.push_back(x[j]);
                    ys.push_back(y[j]);
                }
            loo.push_back(fit_line(xs, ys).slope);
        }
        double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / loo.size();
        double ss = 0.0;
        for (double b : loo) ss += (b - mean) * (b - mean);
        c.beta_se = std::sqrt(ss * (loo.size() - 1.0) / loo.size());
    }
    if (x.size() >= 5) c.gamma = fit_gamma(x, z, y);

    if (lf.residual > opt.max_residual) {
        c.note = "irregular increments";
        return c;
    }
    if (c.beta > -opt.eps_div) {
        if (std::abs(c.beta) <= opt.eps_div && c.gamma < -1.0) {
            c.note = "borderline: log factor may make the series summable";
            return c;
        }
        c.verdict = V::Diverges;
        return c;
    }
    if (c.beta + 2.0 * c.beta_se > -opt.eps_div) {
        c.note = "slope not separated from the divergence threshold";
        return c;
    }
    double ratio = double(H[K]) / double(H[K - 1]);
    if (ratio != 2.0) ratio = double(H[K - 1]) / double(H[K - 2]);
    double lim = tail_limit(S[K], incr(K), c.beta, ratio);
    double lo = tail_limit(S[K], incr(K), c.beta + 2.0 * c.beta_se, ratio);
    double hi = tail_limit(S[K], incr(K), c.beta - 2.0 * c.beta_se, ratio);
    // the same extrapolation one window earlier must agree
    double prev = tail_limit(S[K - 1], incr(K - 1), c.beta, ratio);
    c.limit = lim;
    c.error = std::max(std::abs(lo - hi) / 2.0, std::abs(lim - prev));
    if (!std::isfinite(lim) || c.error > 0.5 * std::abs(lim)) {
        c.note = "tail extrapolation unstable";
        return c;
    }
    c.verdict = V::Converges;
    return c;
}

ExponentResult critical_exponent_analytic(const LinearFormsProblem& p) {
    if (p.psi.law != PsiSpec::Law::Power || !p.psi.support.is_all())
        throw std::invalid_argument("analytic exponent needs a power-law Psi with full support");
    ExponentResult r;
    r.method = ExponentResult::Method::Analytic;
    double n = p.n, m = p.m, tau = p.psi.tau;
    if (tau <= n / m) {
        r.s_star = n * m;
        r.full_dimension = true;
    } else {
        r.s_star = (n - 1.0) * m + (n + m) / (1.0 + tau);
    }
    r.lo = r.hi = r.s_star;
    return r;
}

namespace {

using Probe = std::function<Classification(double s, std::int64_t H)>;

ExponentResult bisect(const Probe& probe, double s_lo, double s_hi, double tol, std::int64_t H_max) {
    ExponentResult r;
    r.method = ExponentResult::Method::NumericBisection;
    std::int64_t H = H_max;
    bool widened = false;
    using V = Classification::Verdict;
    auto run = [&](double s) -> V {
        Classification c = probe(s, H);
        if (c.verdict == V::Inconclusive && !widened) {
            widened = true;
            H *= 4;
            c = probe(s, H);
        }
        r.diagnostics.push_back({s, c.verdict, c.beta});
        return c.verdict;
    };
    V vlo = run(s_lo);
    V vhi = run(s_hi);
    r.lo = s_lo;
    r.hi = s_hi;
    r.H_used = H;
    if (vlo == V::Inconclusive || vhi == V::Inconclusive) {
        r.inconclusive = true;
        r.s_star = 0.5 * (s_lo + s_hi);
        return r;
    }
    if (vlo == V::Converges) {
        r.s_star = s_lo;
        r.hi = s_lo;
        return r;
    }
    if (vhi == V::Diverges) {
        r.s_star = s_hi;
        r.lo = s_hi;
        r.full_dimension = true;
        return r;
    }
    double lo = s_lo, hi = s_hi;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        V v = run(mid);
        if (v == V::Inconclusive) {
            r.inconclusive = true;
            break;
        }
        (v == V::Diverges ? lo : hi) = mid;
    }
    r.lo = lo;
    r.hi = hi;
    r.s_star = 0.5 * (lo + hi);
    r.H_used = H;
    return r;
}

double probe_eps(double tol, const NumericExponentOptions& opt) {
    return opt.eps_div > 0.0 ? opt.eps_div : tol / 4.0;
}

}  // namespace

ExponentResult critical_exponent_numeric(const LinearFormsProblem& p, double s_lo, double s_hi, double tol,
                                         std::int64_t H_max, const NumericExponentOptions& opt) {
    p.validate();
    double base = double((p.n - 1) * p.m), top = double(p.n * p.m);
    if (!(base < s_lo && s_lo < s_hi && s_hi <= top))
        throw std::invalid_argument("bracket must satisfy (n-1)m < s_lo < s_hi <= nm");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (p.psi.identically_zero()) {
        ExponentResult r;
        r.method = ExponentResult::Method::NumericBisection;
        r.s_star = r.lo = r.hi = s_lo;
        r.empty_set = true;
        return r;
    }
    ClassifyOptions co;
    co.eps_div = probe_eps(tol, opt);
    return bisect(
        [&](double s, std::int64_t H) { return classify(corollary_one_sum(p, s, H, opt.threads), co); }, s_lo, s_hi,
        tol, H_max);
}

SquaresExponent squares_critical_exponent(double tau) {
    if (tau <= 1.0) return {2.0, true};
    return {(5.0 + tau) / (2.0 + tau), false};
}

ExponentResult squares_exponent_numeric(const SquaresProblem& sp, double s_lo, double s_hi, double tol,
                                        std::int64_t H_max, const NumericExponentOptions& opt) {
    if (!(1.0 < s_lo && s_lo < s_hi && s_hi <= 2.0)) throw std::invalid_argument("bracket must lie in (1, 2]");
    if (sp.identically_zero()) {
        ExponentResult r;
        r.method = ExponentResult::Method::NumericBisection;
        r.s_star = r.lo = r.hi = s_lo;
        r.empty_set = true;
        return r;
    }
    ClassifyOptions co;
    co.eps_div = probe_eps(tol, opt);
    return bisect([&](double s, std::int64_t H) { return classify(squares_corollary_sum(sp, s, H), co); }, s_lo,
                  s_hi, tol, H_max);
}

}  // namespace diolab
