#include "diolab/problems.hpp"

#include "diolab/series.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diolab {

std::int64_t sup_norm(const IVec& a) {
    std::int64_t h = 0;
    for (auto v : a) h = std::max(h, v < 0 ? -v : v);
    return h;
}

std::int64_t shell_size(int n, std::int64_t h) {
    if (h == 0) return 1;
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < n; ++i) {
        outer *= 2 * h + 1;
        inner *= 2 * h - 1;
    }
    return outer - inner;
}

namespace {

bool is_prime(std::int64_t v) {
    if (v < 0) v = -v;
    if (v < 2) return false;
    for (std::int64_t d = 2; d * d <= v; ++d)
        if (v % d == 0) return false;
    return true;
}

}  // namespace

bool custom_support(const std::string& id, const IVec& a) {
    if (id == "coordinates-all-prime") {
        for (auto v : a)
            if (!is_prime(v)) return false;
        return true;
    }
    if (id == "coordinates-all-nonzero") {
        for (auto v : a)
            if (v == 0) return false;
        return true;
    }
    if (id == "primitive") {
        std::int64_t g = 0;
        for (auto v : a) g = std::gcd(g, v);
        return g == 1;
    }
    if (id == "positive-first") return !a.empty() && a[0] > 0;
    throw std::invalid_argument("unknown custom support '" + id + "'");
}

std::vector<std::string> custom_support_ids() {
    return {"coordinates-all-prime", "coordinates-all-nonzero", "primitive", "positive-first"};
}

bool Support::contains(const IVec& a) const {
    if (!zi.empty()) {
        std::int64_t h = sup_norm(a);
        for (int i : zi) {
            auto v = a.at(i - 1);
            if ((v < 0 ? -v : v) != h) return false;
        }
    }
    if (custom && !custom_support(*custom, a)) return false;
    return true;
}

double PsiSpec::raw(const IVec& a) const {
    if (law == Law::Power) {
        double h = double(sup_norm(a));
        return std::pow(h, -tau);
    }
    auto it = table.find(a);
    return it == table.end() ? 0.0 : it->second;
}

bool PsiSpec::identically_zero() const {
    if (law == Law::Power) return false;
    for (auto& [k, v] : table)
        if (v > 0.0) return false;
    return true;
}

void LinearFormsProblem::validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("n and m must be positive");
    if (int(b.size()) != m)
        throw std::invalid_argument("b has " + std::to_string(b.size()) + " entries, expected m=" + std::to_string(m));
    if (psi.law == PsiSpec::Law::Power && !(psi.tau > 0.0))
        throw std::invalid_argument("psi.tau must be positive");
    for (auto& [a, v] : psi.table) {
        if (int(a.size()) != n) throw std::invalid_argument("psi table key has wrong length");
        if (sup_norm(a) == 0) throw std::invalid_argument("psi table contains a = 0");
        if (!(v >= 0.0)) throw std::invalid_argument("psi table value negative");
    }
    for (int i : psi.support.zi)
        if (i < 1 || i > n) throw std::invalid_argument("support index out of range");
    if (psi.support.custom) custom_support(*psi.support.custom, IVec(n, 1));
}

double SquaresProblem::psi(std::int64_t h) const {
    if (h < 1) throw std::domain_error("psi(h) needs h >= 1");
    if (law == PsiSpec::Law::Power) return std::pow(double(h), -tau);
    auto it = table.find(h);
    return it == table.end() ? 0.0 : it->second;
}

bool SquaresProblem::identically_zero() const {
    if (law == PsiSpec::Law::Power) return false;
    for (auto& [k, v] : table)
        if (v > 0.0) return false;
    return true;
}

void SquaresProblem::validate() const {
    if (law == PsiSpec::Law::Power) {
        if (!(tau > 0.0)) throw std::invalid_argument("squares tau must be positive");
        return;
    }
    if (table.empty()) return;
    // zero beyond the table, so values must be non-increasing from h = 1
    double prev = psi(1);
    for (std::int64_t h = 2; h <= table.rbegin()->first + 1; ++h) {
        double v = psi(h);
        if (v > prev) throw std::invalid_argument("squares psi table is not non-increasing at h=" + std::to_string(h));
        prev = v;
    }
}

double psi_value(const LinearFormsProblem& p, const IVec& a) {
    if (sup_norm(a) == 0) throw std::domain_error("psi undefined at a = 0");
    if (!p.psi.support.contains(a)) return 0.0;
    return p.psi.raw(a);
}

std::vector<std::pair<int, double>> zi_decompose(const LinearFormsProblem& p, std::int64_t H) {
    if (H < 1) throw std::invalid_argument("H must be >= 1");
    std::vector<std::pair<int, double>> out;
    for (int i = 1; i <= p.n; ++i) {
        NeumaierSum acc;
        for (std::int64_t h = 1; h <= H; ++h) {
            for_each_in_shell(p.n, h, [&](const IVec& a) {
                auto v = a[i - 1];
                if ((v < 0 ? -v : v) != h) return;
                acc.add(ipow(psi_value(p, a), p.m));
            });
        }
        out.emplace_back(i, acc.value());
    }
    return out;
}

LinearFormsProblem restrict_to_zi(const LinearFormsProblem& p, int i) {
    if (i < 1 || i > p.n) throw std::invalid_argument("restrict_to_zi index out of range");
    LinearFormsProblem q = p;
    q.psi.support.zi.insert(i);
    return q;
}

std::string to_string(const IVec& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

}  // namespace diolab
