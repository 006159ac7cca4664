#include "commands.hpp"

#include "diolab/config.hpp"
#include "diolab/parallel.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace diolab::cli;

namespace {

std::vector<std::string> given_options(const CLI::App* sub) {
    std::vector<std::string> out;
    for (const CLI::Option* op : sub->get_options())
        if (op->count() > 0 && !op->get_lnames().empty()) out.push_back(op->get_lnames().front());
    return out;
}

void add_common(CLI::App* sub, Common& c, bool problem_required) {
    auto* pr = sub->add_option("--problem", c.problem, "problem spec (.toml or .json)");
    if (problem_required) pr->required();
    pr->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--format", c.format, "csv or json (default from --out extension, else json)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--manifest", c.manifest, "write the run manifest here instead of stderr");
    sub->add_option("--threads", c.threads, "worker threads (default DIOLAB_THREADS or all cores)");
    sub->add_option("--seed", c.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diolab: metric Diophantine approximation lab"};
    app.set_version_flag("--version", DIOLAB_VERSION);
    app.require_subcommand(1);

    Common common;
    int code = kOk;

    SumOptions so;
    auto* sum = app.add_subcommand("sum", "partial sums of a criterion series, with a convergence verdict");
    add_common(sum, common, true);
    sum->add_option("--criterion", so.criterion, "schmidt | hausdorff | squares | cor1")
        ->check(CLI::IsMember({"schmidt", "hausdorff", "squares", "cor1"}));
    sum->add_option("--f", so.f, "dimension function, e.g. r^1.75, r^2*log^1, table:f.csv");
    sum->add_option("--s", so.s, "exponent for cor1");
    sum->add_option("--H", so.H, "largest height");

    ExponentOptions eo;
    auto* exponent = app.add_subcommand("exponent", "critical exponent (Hausdorff dimension)");
    add_common(exponent, common, true);
    exponent->add_option("--mode", eo.mode, "analytic | numeric")->check(CLI::IsMember({"analytic", "numeric"}));
    exponent->add_option("--tol", eo.tol, "bisection tolerance");
    exponent->add_option("--H", eo.H, "largest height per probe");
    exponent->add_option("--s-lo", eo.s_lo, "lower end of the bracket");
    exponent->add_option("--s-hi", eo.s_hi, "upper end of the bracket");

    MeasureOptions mo;
    auto* measure = app.add_subcommand("measure", "Monte Carlo measure per height window (zero-one probe)");
    add_common(measure, common, true);
    measure->add_option("--windows", mo.windows, "dyadic:a..b or cumulative:a..b");
    measure->add_option("--samples", mo.samples, "samples per run");

    BoxdimOptions bo;
    auto* boxdim = app.add_subcommand("boxdim", "box-counting slope of a generation set");
    add_common(boxdim, common, true);
    boxdim->add_option("--generations", bo.generations, "number of height windows K");
    boxdim->add_option("--scales", bo.scales, "box sides 2^-a..2^-b as a..b");
    boxdim->add_option("--windows", bo.windows, "window schedule (default by problem kind)");
    boxdim->add_option("--base-level", bo.base_level, "raster resolution 2^level");

    SliceOptions slo;
    auto* slice = app.add_subcommand("slice", "slice unions of the transformed ball family");
    add_common(slice, common, true);
    slice->add_option("--f", slo.f, "dimension function");
    slice->add_option("--slices", slo.slices, "number of deterministic slices");
    slice->add_option("--windows", slo.windows, "window schedule");
    slice->add_option("--samples", slo.samples, "MC samples per window when m >= 2");
    slice->add_option("--tail", slo.tail, "windows in the tail union");

    EnumerateOptions no;
    auto* enumerate = app.add_subcommand("enumerate", "integer vectors approximating a point");
    add_common(enumerate, common, true);
    enumerate->add_option("--x", no.x, "n*m comma-separated coordinates, column j = form j");
    enumerate->add_option("--H1", no.H1, "smallest height");
    enumerate->add_option("--H2", no.H2, "largest height");

    CheckOptions co;
    auto* check = app.add_subcommand("check", "cross-module invariant bundle");
    add_common(check, common, false);
    check->add_option("preset", co.preset, "collapse | equivalence | exponents | slicing | union-bound")
        ->required()
        ->check(CLI::IsMember(check_presets()));
    check->add_option("--points", co.points, "random points for equivalence");
    check->add_option("--H", co.H, "height bound for equivalence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    try {
        if (common.threads < 0) throw diolab::ConfigError("--threads must be >= 0");
        if (common.threads > 0) diolab::set_default_threads(common.threads);
        if (sum->parsed()) code = run_sum(common, so, given_options(sum));
        else if (exponent->parsed()) code = run_exponent(common, eo, given_options(exponent));
        else if (measure->parsed()) code = run_measure(common, mo, given_options(measure));
        else if (boxdim->parsed()) code = run_boxdim(common, bo, given_options(boxdim));
        else if (slice->parsed()) code = run_slice(common, slo, given_options(slice));
        else if (enumerate->parsed()) code = run_enumerate(common, no, given_options(enumerate));
        else if (check->parsed()) code = run_check(common, co);
    } catch (const std::exception& e) {
        std::cerr << "diolab: error: " << e.what() << "\n";
        return kError;
    }
    return code;
}
