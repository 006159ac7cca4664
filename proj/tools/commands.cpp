#include "commands.hpp"

#include "diolab/config.hpp"
#include "diolab/dimfun.hpp"
#include "diolab/estimators.hpp"
#include "diolab/geometry.hpp"
#include "diolab/parallel.hpp"
#include "diolab/problems.hpp"
#include "diolab/rng.hpp"
#include "diolab/series.hpp"
#include "diolab/slicing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace diolab::cli {

using nlohmann::json;

namespace {

bool was_given(const std::vector<std::string>& given, const std::string& name) {
    return std::find(given.begin(), given.end(), name) != given.end();
}

// [run] defaults from the problem file for options not given on the command line
class RunTable {
public:
    RunTable(const json& doc, const std::vector<std::string>& given) : given_(given) {
        if (doc.contains("run") && doc.at("run").is_object()) run_ = doc.at("run");
    }
    template <class T>
    void fill(const std::string& key, T& dst) const {
        if (was_given(given_, key) || !run_.contains(key)) return;
        try {
            dst = run_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("field 'run." + key + "': wrong type");
        }
    }

private:
    json run_ = json::object();
    const std::vector<std::string>& given_;
};

struct Loaded {
    AnyProblem problem;
    json doc;  // raw document, for the [run] table
};

Loaded load(const Common& c) {
    if (c.problem.empty()) throw ConfigError("--problem is required");
    Loaded L{load_problem(c.problem), json::object()};
    std::ifstream in(c.problem);
    std::stringstream ss;
    ss << in.rdbuf();
    if (c.problem.size() >= 5 && c.problem.substr(c.problem.size() - 5) == ".json")
        L.doc = json::parse(ss.str());
    else
        L.doc = toml_to_json(ss.str());
    return L;
}

json classification_json(const Classification& k) {
    return {{"verdict", to_string(k.verdict)}, {"limit", k.limit},   {"error", k.error}, {"beta", k.beta},
            {"beta_se", k.beta_se},           {"gamma", k.gamma},   {"note", k.note}};
}

json window_json(const Window& w) { return {{"lo", w.lo}, {"hi", w.hi}}; }

json mc_json(const MCMeasureReport& r) {
    return {{"window", window_json(r.window)}, {"samples", r.samples},         {"hits", r.hits},
            {"fraction", r.fraction},         {"ci_lo", r.wilson_ci.lo},     {"ci_hi", r.wilson_ci.hi}};
}

std::string resolve_format(const Common& c) {
    if (!c.format.empty()) {
        if (c.format != "csv" && c.format != "json") throw ConfigError("--format must be csv or json");
        return c.format;
    }
    if (c.out.size() >= 5 && c.out.substr(c.out.size() - 5) == ".json") return "json";
    if (c.out.size() >= 4 && c.out.substr(c.out.size() - 4) == ".csv") return "csv";
    return "json";
}

class Run {
public:
    Run(const Common& c, std::string task, const json& problem, json params)
        : c_(c), task_(std::move(task)), t0_(std::chrono::steady_clock::now()) {
        resolved_ = {{"tool", "diolab"}, {"version", DIOLAB_VERSION}, {"task", task_}, {"problem", problem},
                     {"params", std::move(params)}};
        resolved_["params"]["seed"] = c.seed;
        hash_ = config_hash(resolved_);
    }

    // result: structured report; csv: the series/plot table (without provenance)
    void emit(json result, const std::string& csv, const json& summary) const {
        const std::string fmt = resolve_format(c_);
        std::string text;
        if (fmt == "json") {
            json doc = {{"provenance",
                         {{"config_hash", hash_}, {"seed", c_.seed}, {"version", DIOLAB_VERSION}, {"config", resolved_}}},
                        {"result", std::move(result)}};
            text = doc.dump(2) + "\n";
        } else {
            text = csv_header({hash_, c_.seed, DIOLAB_VERSION}) + "# config: " + resolved_.dump() + "\n" + csv;
        }
        if (c_.out.empty())
            std::cout << text;
        else
            write_atomic(c_.out, text);

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        json manifest = {{"config_hash", hash_},
                         {"version", DIOLAB_VERSION},
                         {"task", task_},
                         {"wall_time_s", wall},
                         {"threads", resolve_threads(c_.threads)},
                         {"summary", summary}};
        if (c_.manifest.empty())
            std::cerr << manifest.dump() << "\n";
        else
            write_atomic(c_.manifest, manifest.dump(2) + "\n");
    }

private:
    const Common& c_;
    std::string task_;
    std::chrono::steady_clock::time_point t0_;
    json resolved_;
    std::string hash_;
};

const LinearFormsProblem& need_linear(const AnyProblem& p, const std::string& task) {
    if (const auto* lp = std::get_if<LinearFormsProblem>(&p)) return *lp;
    throw ConfigError(task + " needs a linear-forms problem");
}

std::string series_csv(const PartialSumSeries& s) {
    std::ostringstream os;
    os.precision(17);
    os << "H,S_H\n";
    for (std::size_t i = 0; i < s.heights.size(); ++i) os << s.heights[i] << "," << s.sums[i] << "\n";
    return os.str();
}

json series_json(const PartialSumSeries& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.heights.size(); ++i) rows.push_back({{"H", s.heights[i]}, {"S_H", s.sums[i]}});
    return rows;
}

json exponent_json(const ExponentResult& r) {
    json probes = json::array();
    for (const auto& pr : r.diagnostics) probes.push_back({{"s", pr.s}, {"verdict", to_string(pr.verdict)}, {"beta", pr.beta}});
    return {{"s_star", r.s_star},
            {"method", r.method == ExponentResult::Method::Analytic ? "analytic" : "numeric"},
            {"lo", r.lo},
            {"hi", r.hi},
            {"full_dimension", r.full_dimension},
            {"empty_set", r.empty_set},
            {"inconclusive", r.inconclusive},
            {"H_used", r.H_used},
            {"probes", probes}};
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("--x: cannot parse '" + cell + "' as a number");
        }
    }
    return out;
}

}  // namespace

int run_sum(const Common& c, SumOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("criterion", o.criterion);
    rt.fill("f", o.f);
    rt.fill("s", o.s);
    rt.fill("H", o.H);
    if (o.H < 1) throw ConfigError("--H must be positive");

    json params = {{"criterion", o.criterion}, {"H", o.H}};
    PartialSumSeries series;
    if (const auto* sp = std::get_if<SquaresProblem>(&L.problem)) {
        if (o.criterion == "squares") {
            params["f"] = o.f;
            series = squares_sum(*sp, parse_dimfun(o.f), o.H);
        } else if (o.criterion == "cor1") {
            params["s"] = o.s;
            series = squares_corollary_sum(*sp, o.s, o.H);
        } else {
            throw ConfigError("criterion '" + o.criterion + "' does not apply to a squares problem (use squares or cor1)");
        }
    } else {
        const auto& p = std::get<LinearFormsProblem>(L.problem);
        if (o.criterion == "schmidt") {
            series = schmidt_sum(p, o.H, c.threads);
        } else if (o.criterion == "hausdorff") {
            params["f"] = o.f;
            series = hausdorff_sum(p, parse_dimfun(o.f), o.H, c.threads);
        } else if (o.criterion == "cor1") {
            params["s"] = o.s;
            series = corollary_one_sum(p, o.s, o.H, c.threads);
        } else {
            throw ConfigError("unknown criterion '" + o.criterion + "' (schmidt, hausdorff, squares, cor1)");
        }
    }
    Classification k = classify(series);
    Run run(c, "sum", problem_to_json(L.problem), params);
    json result = {{"label", series.label}, {"series", series_json(series)}, {"classification", classification_json(k)}};
    run.emit(result, series_csv(series), {{"verdict", to_string(k.verdict)}});
    return k.verdict == Classification::Verdict::Inconclusive ? kInconclusive : kOk;
}

int run_exponent(const Common& c, ExponentOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("mode", o.mode);
    rt.fill("tol", o.tol);
    rt.fill("H", o.H);
    json params = {{"mode", o.mode}};
    ExponentResult r;
    if (o.mode != "analytic" && o.mode != "numeric") throw ConfigError("--mode must be analytic or numeric");
    if (o.mode == "numeric") {
        params["tol"] = o.tol;
        params["H"] = o.H;
    }
    NumericExponentOptions no;
    no.threads = c.threads;
    if (const auto* sp = std::get_if<SquaresProblem>(&L.problem)) {
        if (o.mode == "analytic") {
            if (sp->law != PsiSpec::Law::Power) throw ConfigError("analytic exponent needs a power-law psi");
            SquaresExponent e = squares_critical_exponent(sp->tau);
            r.s_star = r.lo = r.hi = e.s_star;
            r.full_dimension = e.full_dimension;
        } else {
            double lo = o.s_lo > 0 ? o.s_lo : 1.0 + 1e-6, hi = o.s_hi > 0 ? o.s_hi : 2.0;
            params["s_lo"] = lo;
            params["s_hi"] = hi;
            r = squares_exponent_numeric(*sp, lo, hi, o.tol, o.H, no);
        }
    } else {
        const auto& p = std::get<LinearFormsProblem>(L.problem);
        if (o.mode == "analytic") {
            r = critical_exponent_analytic(p);
        } else {
            const double base = double((p.n - 1) * p.m), top = double(p.n * p.m);
            double lo = o.s_lo > 0 ? o.s_lo : base + 1e-6, hi = o.s_hi > 0 ? o.s_hi : top;
            params["s_lo"] = lo;
            params["s_hi"] = hi;
            r = critical_exponent_numeric(p, lo, hi, o.tol, o.H, no);
        }
    }
    Run run(c, "exponent", problem_to_json(L.problem), params);
    std::ostringstream csv;
    csv.precision(17);
    csv << "s_star,lo,hi,method,inconclusive\n"
        << r.s_star << "," << r.lo << "," << r.hi << "," << (o.mode == "analytic" ? "analytic" : "numeric") << ","
        << (r.inconclusive ? 1 : 0) << "\n";
    run.emit(exponent_json(r), csv.str(), {{"s_star", r.s_star}, {"inconclusive", r.inconclusive}});
    return r.inconclusive ? kInconclusive : kOk;
}

int run_measure(const Common& c, MeasureOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("windows", o.windows);
    rt.fill("samples", o.samples);
    if (o.samples < 1) throw ConfigError("--samples must be positive");
    auto schedule = parse_windows(o.windows);
    ZeroOneReport z = zero_one_probe(L.problem, schedule, o.samples, c.seed, c.threads);

    json wins = json::array(), cums = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "lo,hi,fraction,ci_lo,ci_hi,union_bound,cum_hi,cum_fraction,cum_ci_lo,cum_ci_hi\n";
    for (std::size_t i = 0; i < z.windows.size(); ++i) {
        json w = mc_json(z.windows[i]);
        w["union_bound"] = z.union_bounds[i];
        wins.push_back(w);
        cums.push_back(mc_json(z.cumulative[i]));
        const auto& a = z.windows[i];
        const auto& b = z.cumulative[i];
        csv << a.window.lo << "," << a.window.hi << "," << a.fraction << "," << a.wilson_ci.lo << "," << a.wilson_ci.hi
            << "," << z.union_bounds[i] << "," << b.window.hi << "," << b.fraction << "," << b.wilson_ci.lo << ","
            << b.wilson_ci.hi << "\n";
    }
    json result = {{"trend", to_string(z.trend)},
                   {"windows", wins},
                   {"cumulative", cums},
                   {"union_bound_holds", z.union_bound_holds},
                   {"window_fractions_decrease", z.window_fractions_decrease},
                   {"series", classification_json(z.series)},
                   {"out_of_theorem", out_of_theorem(L.problem)},
                   {"note", z.note}};
    Run run(c, "measure", problem_to_json(L.problem), {{"windows", o.windows}, {"samples", o.samples}});
    run.emit(result, csv.str(), {{"trend", to_string(z.trend)}});
    return z.trend == ZeroOneReport::Trend::Inconclusive ? kInconclusive : kOk;
}

int run_boxdim(const Common& c, BoxdimOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("generations", o.generations);
    rt.fill("scales", o.scales);
    rt.fill("windows", o.windows);
    rt.fill("base_level", o.base_level);
    if (o.generations < 1) throw ConfigError("--generations must be positive");
    std::vector<Window> schedule;
    if (!o.windows.empty())
        schedule = parse_windows(o.windows);
    else if (std::holds_alternative<SquaresProblem>(L.problem))
        schedule = dyadic_windows(0, o.generations - 1);
    else
        schedule = dyadic_windows(1, o.generations);
    if (int(schedule.size()) < o.generations) throw ConfigError("window schedule shorter than --generations");
    auto levels = parse_int_range(o.scales);
    if (levels.front() < 0 || levels.back() > o.base_level) throw ConfigError("--scales must lie in 0..base_level");
    GenerationSet G = generation_set(L.problem, o.generations, schedule);
    BoxSampling sampling;
    sampling.base_level = o.base_level;
    BoxCountReport br = box_count(G, levels, sampling);

    std::ostringstream csv;
    csv.precision(17);
    csv << "# slope=" << br.slope << " residual=" << br.residual << "\n";
    csv << "delta,N\n";
    json rows = json::array();
    for (std::size_t i = 0; i < br.levels.size(); ++i) {
        csv << br.scales[i] << "," << br.counts[i] << "\n";
        rows.push_back({{"delta", br.scales[i]}, {"level", br.levels[i]}, {"N", br.counts[i]}});
    }
    json gens = json::array();
    for (const auto& w : br.generations) gens.push_back(window_json(w));
    json result = {{"slope", br.slope},
                   {"residual", br.residual},
                   {"fit_range", {br.fit_range.first, br.fit_range.second}},
                   {"local_slopes", br.local_slopes},
                   {"counts", rows},
                   {"generations", gens},
                   {"sampling", br.sampling},
                   {"note", br.note}};
    if (const auto* sp = std::get_if<SquaresProblem>(&L.problem); sp && sp->law == PsiSpec::Law::Power)
        result["predicted_dimension"] = squares_critical_exponent(sp->tau).s_star;
    json params = {{"generations", o.generations}, {"scales", o.scales}, {"base_level", o.base_level}};
    if (!o.windows.empty()) params["windows"] = o.windows;
    Run run(c, "boxdim", problem_to_json(L.problem), params);
    run.emit(result, csv.str(), {{"slope", br.slope}});
    return kOk;
}

int run_slice(const Common& c, SliceOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("f", o.f);
    rt.fill("slices", o.slices);
    rt.fill("windows", o.windows);
    rt.fill("samples", o.samples);
    rt.fill("tail", o.tail);
    const auto& p = need_linear(L.problem, "slice");
    if (o.slices < 1) throw ConfigError("--slices must be positive");
    auto schedule = parse_windows(o.windows);
    SlicePipelineOptions po;
    po.samples = o.samples;
    po.seed = c.seed;
    po.tail_windows = o.tail;
    po.threads = c.threads;
    auto pts = slice_points(p.n, p.m, o.slices);
    SlicePipelineReport rep = slice_to_hausdorff_pipeline(p, parse_dimfun(o.f), pts, schedule, po);

    std::ostringstream csv;
    csv.precision(17);
    csv << "slice,final_union,tail_union,final_deflated_content,content_increasing\n";
    json slices = json::array();
    for (std::size_t i = 0; i < rep.slices.size(); ++i) {
        const auto& s = rep.slices[i];
        json ci = json::array();
        for (const auto& w : s.union_ci) ci.push_back({w.lo, w.hi});
        slices.push_back({{"x0", s.x0},
                          {"exact", s.exact},
                          {"cumulative_union", s.cumulative_union},
                          {"union_ci", ci},
                          {"tail_union", s.tail_union},
                          {"deflated_union", s.deflated_union},
                          {"deflated_content", s.deflated_content},
                          {"balls", s.balls},
                          {"content_increasing", s.content_increasing}});
        csv << i << "," << (s.cumulative_union.empty() ? 0.0 : s.cumulative_union.back()) << "," << s.tail_union << ","
            << (s.deflated_content.empty() ? 0.0 : s.deflated_content.back()) << "," << (s.content_increasing ? 1 : 0)
            << "\n";
    }
    json wins = json::array();
    for (const auto& w : rep.windows) wins.push_back(window_json(w));
    json result = {{"f", to_string(rep.f)},
                   {"g", to_string(rep.g)},
                   {"windows", wins},
                   {"collapse", rep.collapse},
                   {"psi_tilde_law", rep.psi_tilde_law},
                   {"slices", slices},
                   {"slices_full", rep.slices_full},
                   {"slices_content_increasing", rep.slices_content_increasing},
                   {"max_tail_union", rep.max_tail_union},
                   {"note", rep.note}};
    if (rep.series_available) result["psi_tilde_series"] = classification_json(rep.psi_tilde_series);
    json params = {{"f", o.f}, {"slices", o.slices}, {"windows", o.windows}, {"tail", o.tail}};
    if (p.m >= 2) params["samples"] = o.samples;
    Run run(c, "slice", problem_to_json(L.problem), params);
    run.emit(result, csv.str(), {{"slices_full", rep.slices_full}, {"max_tail_union", rep.max_tail_union}});
    return kOk;
}

int run_enumerate(const Common& c, EnumerateOptions o, const std::vector<std::string>& given) {
    Loaded L = load(c);
    RunTable rt(L.doc, given);
    rt.fill("x", o.x);
    rt.fill("H1", o.H1);
    rt.fill("H2", o.H2);
    const auto& p = need_linear(L.problem, "enumerate");
    if (o.H1 < 1 || o.H2 < o.H1) throw ConfigError("need 1 <= H1 <= H2");
    auto xs = parse_doubles(o.x);
    if (int(xs.size()) != p.n * p.m)
        throw ConfigError("--x needs n*m = " + std::to_string(p.n * p.m) + " coordinates (column j holds form j)");
    Point X(p.n, p.m, xs);
    auto hits = hit_list(X, p, o.H1, o.H2, c.threads);

    std::ostringstream csv;
    csv.precision(17);
    for (int i = 1; i <= p.n; ++i) csv << "a" << i << ",";
    csv << "psi,max_residual\n";
    json rows = json::array();
    for (const auto& a : hits) {
        const double psi = psi_value(p, a), res = form_residual(X, a, p.b);
        for (auto v : a) csv << v << ",";
        csv << psi << "," << res << "\n";
        rows.push_back({{"a", a}, {"psi", psi}, {"max_residual", res}});
    }
    Run run(c, "enumerate", problem_to_json(L.problem), {{"x", xs}, {"H1", o.H1}, {"H2", o.H2}});
    run.emit({{"hits", rows}, {"count", hits.size()}}, csv.str(), {{"count", hits.size()}});
    return kOk;
}

// ---------------------------------------------------------------------------
// check bundles

namespace {

struct CaseResult {
    std::string name;
    bool pass;
    json detail;
};

LinearFormsProblem power_problem(int n, int m, double tau) {
    LinearFormsProblem p;
    p.n = n;
    p.m = m;
    p.b.assign(m, 0.0);
    p.psi.tau = tau;
    return p;
}

std::vector<std::tuple<int, int, double>> exponent_grid() {
    std::vector<std::tuple<int, int, double>> g;
    for (auto [n, m] : {std::pair{2, 1}, std::pair{1, 2}, std::pair{2, 2}})
        for (double tau : {1.5, 2.0, 3.0})
            if (tau > double(n) / double(m)) g.emplace_back(n, m, tau);
    return g;
}

std::vector<CaseResult> check_collapse(int threads) {
    std::vector<CaseResult> out;
    for (auto [n, m] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 1}})
        for (double tau : {1.5, 2.0, 3.0}) {
            LinearFormsProblem p = power_problem(n, m, tau);
            auto a = schmidt_sum(p, 64, threads);
            auto b = hausdorff_sum(p, DimensionFunction::power(double(n * m)), 64, threads);
            bool same = a.heights == b.heights && a.sums == b.sums;
            out.push_back({"n=" + std::to_string(n) + " m=" + std::to_string(m) + " tau=" + fmt_double(tau), same,
                           {{"S_64", a.sums.back()}}});
        }
    return out;
}

std::vector<CaseResult> check_equivalence(int points, std::int64_t H, std::uint64_t seed) {
    std::vector<CaseResult> out;
    for (auto [n, m, tau] : exponent_grid()) {
        LinearFormsProblem p = power_problem(n, m, tau);
        std::vector<char> ok(std::size_t(std::max(points, 0)), 0);
        parallel_for(ok.size(), 0, [&](std::size_t t) {
            CounterRng rng(seed, std::uint64_t(t));
            Point X(n, m);
            for (auto& v : X.x) v = rng.uniform();
            ok[t] = equivalence_check(X, p, H);
        });
        int bad = int(std::count(ok.begin(), ok.end(), 0));
        out.push_back({"n=" + std::to_string(n) + " m=" + std::to_string(m) + " tau=" + fmt_double(tau), bad == 0,
                       {{"points", points}, {"H", H}, {"mismatches", bad}}});
    }
    return out;
}

std::vector<CaseResult> check_exponents(int threads) {
    std::vector<CaseResult> out;
    NumericExponentOptions no;
    no.threads = threads;
    for (auto [n, m, tau] : exponent_grid()) {
        LinearFormsProblem p = power_problem(n, m, tau);
        double analytic = critical_exponent_analytic(p).s_star;
        double closed = double((n - 1) * m) + double(n + m) / (1.0 + tau);
        auto num = critical_exponent_numeric(p, double((n - 1) * m) + 1e-6, double(n * m), 0.02, 1 << 14, no);
        bool pass = analytic == closed && !num.inconclusive && std::abs(num.s_star - analytic) <= 0.02;
        out.push_back({"n=" + std::to_string(n) + " m=" + std::to_string(m) + " tau=" + fmt_double(tau), pass,
                       {{"analytic", analytic}, {"numeric", num.s_star}, {"H_used", num.H_used}}});
    }
    return out;
}

std::string preset_dir() {
    if (const char* env = std::getenv("DIOLAB_PRESET_DIR")) return env;
    return DIOLAB_PRESET_DIR;
}

std::vector<CaseResult> check_slicing(const std::string& corpus_path) {
    std::ifstream in(corpus_path);
    if (!in) throw ConfigError("cannot open slicing corpus '" + corpus_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json doc = toml_to_json(ss.str());
    if (!doc.contains("case") || !doc.at("case").is_array()) throw ConfigError(corpus_path + ": no [[case]] entries");
    std::vector<CaseResult> out;
    for (const auto& cs : doc.at("case")) {
        ProductSet A;
        A.k = cs.at("k").get<int>();
        for (const auto& b : cs.at("boxes")) A.boxes.push_back({b.at(0).get<std::vector<double>>(), b.at(1).get<std::vector<double>>()});
        const int l = cs.at("l").get<int>();
        const std::string f = cs.at("f").get<std::string>();
        SlicingCheck r = slicing_inequality_check(A, parse_dimfun(f), l);
        out.push_back({cs.at("name").get<std::string>() + " f=" + f + " l=" + std::to_string(l), r.holds && !r.abstained,
                       {{"lhs_upper", r.lhs_upper}, {"rhs_lower", r.rhs_lower}, {"note", r.note}}});
    }
    return out;
}

std::vector<CaseResult> check_union_bound(std::uint64_t seed, int threads) {
    LinearFormsProblem p = power_problem(2, 1, 2.5);
    auto z = zero_one_probe(p, dyadic_windows(1, 8), 20000, seed, threads);
    std::vector<CaseResult> out;
    for (std::size_t i = 0; i < z.windows.size(); ++i) {
        const auto& w = z.windows[i];
        bool ok = w.fraction <= z.union_bounds[i] + 3.0 * w.half_width();
        out.push_back({"window [" + std::to_string(w.window.lo) + "," + std::to_string(w.window.hi) + "]", ok,
                       {{"fraction", w.fraction}, {"union_bound", z.union_bounds[i]}}});
    }
    out.push_back({"window fractions decrease", z.window_fractions_decrease, json::object()});
    return out;
}

}  // namespace

std::vector<std::string> check_presets() { return {"collapse", "equivalence", "exponents", "slicing", "union-bound"}; }

int run_check(const Common& c, const CheckOptions& o) {
    std::vector<CaseResult> cases;
    json params = {{"preset", o.preset}};
    if (o.preset == "collapse") {
        cases = check_collapse(c.threads);
    } else if (o.preset == "equivalence") {
        params["points"] = o.points;
        params["H"] = o.H;
        cases = check_equivalence(o.points, o.H, c.seed);
    } else if (o.preset == "exponents") {
        cases = check_exponents(c.threads);
    } else if (o.preset == "slicing") {
        std::string path = c.problem.empty() ? preset_dir() + "/slicing_corpus.toml" : c.problem;
        params["corpus"] = path;
        cases = check_slicing(path);
    } else if (o.preset == "union-bound") {
        cases = check_union_bound(c.seed, c.threads);
    } else {
        throw ConfigError("unknown preset '" + o.preset + "'");
    }
    bool all = !cases.empty();
    json arr = json::array();
    std::ostringstream csv;
    csv << "case,pass\n";
    for (const auto& cr : cases) {
        all = all && cr.pass;
        arr.push_back({{"case", cr.name}, {"pass", cr.pass}, {"detail", cr.detail}});
        csv << '"' << cr.name << "\"," << (cr.pass ? 1 : 0) << "\n";
    }
    Run run(c, "check", json::object(), params);
    run.emit({{"preset", o.preset}, {"pass", all}, {"cases", arr}}, csv.str(), {{"pass", all}});
    return all ? kOk : kError;
}

}  // namespace diolab::cli
