#include "cli.hpp"

#include "ltest/baselines.hpp"
#include "ltest/combine.hpp"
#include "ltest/correlation.hpp"
#include "ltest/data.hpp"
#include "ltest/lstatistic.hpp"
#include "ltest/parallel.hpp"
#include "ltest/permutation.hpp"
#include "ltest/report.hpp"
#include "ltest/simlab.hpp"
#include "ltest/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace ltest::cli
{
namespace
{

using nlohmann::json;

/// Any user-facing input problem; mapped to exit code 2.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Options
{
    std::string input;
    bool header = false;
    std::string methods;
    std::string ks;
    std::size_t fixed_k = 5;
    std::size_t B = 400;
    std::uint64_t seed = 1;
    std::string alpha = "0.05";
    std::size_t R = 1000;
    long n = 100;
    long p = 100;
    std::string dist = "gaussian";
    std::string m;
    double theta = 1.5;
    int threads = 0;
    std::string out;
    std::string svg;
    std::string config;
    std::string null_path;
    std::string p_value_mode = "strict";
    std::string grid_base = "pairs";
    bool timing = false;
};

std::vector<std::string> split_csv(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            parts.push_back(item);
    return parts;
}

template <class T>
T parse_number(const std::string& text, const std::string& what)
{
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InputError("invalid " + what + ": '" + text + "'");
    return v;
}

template <class T>
std::vector<T> parse_number_list(const std::string& text, const std::string& what)
{
    std::vector<T> out;
    for (const auto& part : split_csv(text))
        out.push_back(parse_number<T>(part, what));
    if (out.empty())
        throw InputError("empty " + what + " list");
    return out;
}

PValueMode parse_mode(const std::string& s)
{
    if (s == "strict")
        return PValueMode::strict;
    if (s == "conservative")
        return PValueMode::conservative;
    throw InputError("--p-value-mode must be 'strict' or 'conservative', got '" + s + "'");
}

GridBase parse_grid_base(const std::string& s)
{
    if (s == "pairs")
        return GridBase::pair_count;
    if (s == "variables")
        return GridBase::variable_count;
    throw InputError("--grid-base must be 'pairs' or 'variables', got '" + s + "'");
}

std::string mode_name(PValueMode m)
{
    return m == PValueMode::strict ? "strict" : "conservative";
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback)
{
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw InputError("cannot open '" + path + "' for writing");
    f << text;
    if (!f)
        throw InputError("failed writing '" + path + "'");
}

json read_json_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

bool given(const CLI::App* app, const std::string& name)
{
    const CLI::Option* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

// ---- test / null -----------------------------------------------------------

struct TestPlan
{
    std::vector<MethodSpec> methods;
    std::optional<KGrid> grid;
    std::vector<StatisticRequest> requests;
};

TestPlan plan_for(const DataMatrix& data, const Options& o, const std::string& default_methods)
{
    TestPlan plan;
    plan.methods = MethodSpec::parse_list(o.methods.empty() ? default_methods : o.methods);
    const std::size_t p_star = pair_count(data.p());
    std::set<std::string> seen;
    auto add = [&](StatisticRequest r) {
        if (seen.insert(r.id).second)
            plan.requests.push_back(std::move(r));
    };
    for (const auto& m : plan.methods) {
        using Kind = MethodSpec::Kind;
        switch (m.kind) {
        case Kind::tk:
            if (m.k < 1 || m.k > p_star)
                throw InputError("k = " + std::to_string(m.k) + " outside [1, p*] with p* = " + std::to_string(p_star));
            add(request_tk(m.k));
            break;
        case Kind::tgamma:
            if (!(m.gamma > 0.0 && m.gamma <= 1.0))
                throw InputError("gamma must lie in (0, 1]");
            add(request_tgamma(m.gamma, data.p()));
            break;
        case Kind::tc:
            if (!plan.grid) {
                try {
                    plan.grid = o.ks.empty()
                                    ? default_grid(data.p(), o.fixed_k, 16, parse_grid_base(o.grid_base))
                                    : explicit_grid(data.p(), o.fixed_k, parse_number_list<std::size_t>(o.ks, "k"));
                } catch (const std::invalid_argument& e) {
                    throw InputError(std::string("cannot build the k grid: ") + e.what());
                } catch (const std::out_of_range& e) {
                    throw InputError(std::string("cannot build the k grid: ") + e.what());
                }
            }
            for (auto& r : grid_requests(*plan.grid))
                add(std::move(r));
            break;
        case Kind::lx:
            add(request_tlx());
            break;
        case Kind::sc:
        case Kind::j:
        case Kind::f:
            if ((m.kind != Kind::sc) && data.p() < 3)
                throw InputError("T_J and T_F need p >= 3");
            break;
        }
    }
    return plan;
}

DataMatrix load_input(const Options& o)
{
    if (o.input.empty())
        throw InputError("--input is required");
    if (!std::ifstream(o.input))
        throw InputError("cannot open input file '" + o.input + "'");
    return load_csv(o.input, o.header);
}

json components_json(const CombinedOutcome& c)
{
    json arr = json::array();
    for (const auto& comp : c.components)
        arr.push_back({{"id", comp.id},
                       {"k", comp.k},
                       {"statistic", comp.statistic},
                       {"p_value", comp.p_value.value()},
                       {"clipped_p_value", comp.clipped_p_value.value()}});
    return arr;
}

int cmd_test(const Options& o, std::ostream& out)
{
    const auto start = std::chrono::steady_clock::now();
    const DataMatrix data = load_input(o);
    const TestPlan plan = plan_for(data, o, "tc,sc,j,lx,f");
    const PValueMode mode = parse_mode(o.p_value_mode);
    const double alpha = parse_number<double>(o.alpha, "alpha");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InputError("alpha must lie in (0,1)");

    std::optional<NullEnsemble> null;
    std::string null_source = "computed";
    if (!plan.requests.empty()) {
        if (!o.null_path.empty()) {
            try {
                null = read_json_file(o.null_path).get<NullEnsemble>();
            } catch (const json::exception& e) {
                throw InputError("'" + o.null_path + "' is not a null ensemble: " + e.what());
            } catch (const std::invalid_argument& e) {
                throw InputError("'" + o.null_path + "': " + e.what());
            }
            if (null->data_fingerprint != data_fingerprint(data))
                throw InputError("null ensemble '" + o.null_path + "' was built from different data");
            for (const auto& r : plan.requests)
                if (!null->contains(r.id))
                    throw InputError("null ensemble '" + o.null_path + "' has no replicates of " + r.id);
            null_source = o.null_path;
        } else {
            if (o.B < 1)
                throw InputError("B must be >= 1");
            null = build_null(data, plan.requests, o.B, RngSpec{o.seed, 0}, resolve_threads(o.threads));
        }
    }

    ReplicateContext ctx(data);
    json methods = json::array();
    for (const auto& m : plan.methods) {
        using Kind = MethodSpec::Kind;
        json entry = {{"method", m.label()}, {"token", m.token()}};
        double statistic = 0.0;
        double p_value = 1.0;
        Calibration calibration = Calibration::permutation;
        switch (m.kind) {
        case Kind::tk:
        case Kind::tgamma: {
            const std::size_t k = m.kind == Kind::tk ? m.k : diverging_k(m.gamma, pair_count(data.p()));
            ctx.prepare_top(k);
            statistic = ctx.top_sum(k);
            p_value = perm_p_value(statistic, null->replicates("T_" + std::to_string(k)), mode);
            entry["k"] = k;
            if (m.kind == Kind::tgamma) {
                entry["gamma"] = m.gamma;
                entry["asymptotic_p_value"] = diverging_p_value(data, m.gamma).p_value.value();
            }
            break;
        }
        case Kind::tc: {
            std::vector<double> observed;
            const auto all_k = plan.grid->all_k();
            ctx.prepare_top(*std::max_element(all_k.begin(), all_k.end()));
            for (auto k : all_k)
                observed.push_back(ctx.top_sum(k));
            const CombinedOutcome c = combine_from_ensemble(*plan.grid, observed, *null, mode);
            statistic = c.t_c;
            p_value = c.p_c;
            entry["components"] = components_json(c);
            break;
        }
        case Kind::sc: {
            const auto r = t_sc_from_sum(ctx.total(), data.n(), data.p());
            statistic = r.statistic;
            p_value = r.p_value;
            calibration = r.calibration;
            break;
        }
        case Kind::j: {
            const auto r = t_j_from_max(ctx.top_sum(1), data.p());
            statistic = r.statistic;
            p_value = r.p_value;
            calibration = r.calibration;
            break;
        }
        case Kind::f: {
            const auto sc = t_sc_from_sum(ctx.total(), data.n(), data.p());
            const auto j = t_j_from_max(ctx.top_sum(1), data.p());
            const auto r = t_f_from(sc.p_value, j.p_value);
            statistic = r.statistic;
            p_value = r.p_value;
            calibration = r.calibration;
            entry["components"] = json::array({{{"id", "T_SC"}, {"p_value", sc.p_value.value()}},
                                               {{"id", "T_J"}, {"p_value", j.p_value.value()}}});
            break;
        }
        case Kind::lx: {
            const auto r = t_lx(data, *null, mode);
            statistic = r.statistic;
            p_value = r.p_value;
            calibration = r.calibration;
            break;
        }
        }
        entry["statistic"] = statistic;
        entry["p_value"] = p_value;
        entry["calibration"] = std::string(to_string(calibration));
        entry["reject"] = p_value <= alpha;
        methods.push_back(entry);
    }

    json report = {{"tool", "ltest"},
                   {"version", kVersion},
                   {"command", "test"},
                   {"input", o.input},
                   {"n", data.n()},
                   {"p", data.p()},
                   {"p_star", pair_count(data.p())},
                   {"data_fingerprint", data_fingerprint(data)},
                   {"alpha", alpha},
                   {"p_value_mode", mode_name(mode)},
                   {"null_source", null_source},
                   {"methods", methods}};
    if (null) {
        report["B"] = null->B;
        report["seed"] = {{"master_seed", null->seed.master_seed}, {"stream_index", null->seed.stream_index}};
    } else {
        report["B"] = nullptr;
        report["seed"] = nullptr;
    }
    if (o.timing)
        report["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(o.out, report.dump(2) + "\n", out);
    return kExitOk;
}

int cmd_null(const Options& o, std::ostream& out)
{
    const DataMatrix data = load_input(o);
    const TestPlan plan = plan_for(data, o, "tc");
    if (plan.requests.empty())
        throw InputError("no permutation-calibrated statistic selected (use t5, tk=, tgamma=, tc or lx)");
    if (o.B < 1)
        throw InputError("B must be >= 1");
    const NullEnsemble e = build_null(data, plan.requests, o.B, RngSpec{o.seed, 0}, resolve_threads(o.threads));
    write_text(o.out, json(e).dump() + "\n", out);
    return kExitOk;
}

// ---- size / power ------------------------------------------------------------

std::vector<std::string> json_tokens(const json& v)
{
    if (v.is_string())
        return split_csv(v.get<std::string>());
    return v.get<std::vector<std::string>>();
}

/// Overlay a JSON config file (same keys as the echoed config) onto defaults.
void apply_json(const json& j, ExperimentConfig& c, std::vector<std::optional<AlternativeSpec>>& alts,
                std::optional<double>& theta, int& threads)
{
    if (!j.is_object())
        throw InputError("config must be a JSON object");
    static const std::set<std::string> known = {"n",       "p",          "dist",         "methods",   "alphas",
                                                "alpha",   "R",          "B",            "seed",      "threads",
                                                "fixed_k", "grid_ks",    "grid_base",    "p_value_mode",
                                                "m",       "theta",      "alternative",  "alternatives"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw InputError("unknown config key '" + key + "'");
    if (j.contains("n"))
        c.n = j.at("n").get<Index>();
    if (j.contains("p"))
        c.p = j.at("p").get<Index>();
    if (j.contains("dist"))
        c.dist = InnovationDist::parse(j.at("dist").get<std::string>());
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& t : json_tokens(j.at("methods")))
            c.methods.push_back(MethodSpec::parse(t));
    }
    if (j.contains("alphas"))
        c.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("alpha"))
        c.alphas = {j.at("alpha").get<double>()};
    if (j.contains("R"))
        c.R = j.at("R").get<std::size_t>();
    if (j.contains("B"))
        c.B = j.at("B").get<std::size_t>();
    if (j.contains("seed"))
        c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads"))
        threads = j.at("threads").get<int>();
    if (j.contains("fixed_k"))
        c.fixed_k = j.at("fixed_k").get<std::size_t>();
    if (j.contains("grid_ks"))
        c.grid_ks = j.at("grid_ks").get<std::vector<std::size_t>>();
    if (j.contains("grid_base")) {
        c.grid_base = parse_grid_base(j.at("grid_base").get<std::string>());
        c.grid_ks.clear();
    }
    if (j.contains("p_value_mode"))
        c.p_value_mode = parse_mode(j.at("p_value_mode").get<std::string>());
    if (j.contains("theta"))
        theta = j.at("theta").get<double>();
    auto alt_from = [](const json& a) -> std::optional<AlternativeSpec> {
        if (a.is_null())
            return std::nullopt;
        return AlternativeSpec{a.at("m").get<int>(), a.value("theta", 1.5)};
    };
    if (j.contains("alternatives")) {
        alts.clear();
        for (const auto& a : j.at("alternatives"))
            alts.push_back(alt_from(a));
    } else if (j.contains("alternative") && !j.at("alternative").is_null()) {
        alts = {alt_from(j.at("alternative"))};
    }
    if (j.contains("m")) {
        alts.clear();
        const auto ms = j.at("m").is_array() ? j.at("m").get<std::vector<int>>() : std::vector<int>{j.at("m").get<int>()};
        for (int m : ms)
            alts.push_back(m == 0 ? std::nullopt : std::optional<AlternativeSpec>(AlternativeSpec{m, 1.5}));
    }
}

struct Experiment
{
    ExperimentConfig config;
    std::vector<std::optional<AlternativeSpec>> alternatives;
};

Experiment build_experiment(const CLI::App* sub, const Options& o)
{
    Experiment e;
    ExperimentConfig& c = e.config;
    std::optional<double> theta;
    int threads = 0;
    if (!o.config.empty()) {
        try {
            apply_json(read_json_file(o.config), c, e.alternatives, theta, threads);
        } catch (const json::exception& ex) {
            throw InputError("config '" + o.config + "': " + ex.what());
        }
    }
    if (given(sub, "--n"))
        c.n = o.n;
    if (given(sub, "--p"))
        c.p = o.p;
    if (given(sub, "--dist"))
        c.dist = InnovationDist::parse(o.dist);
    if (given(sub, "--method"))
        c.methods = MethodSpec::parse_list(o.methods);
    if (given(sub, "--alpha"))
        c.alphas = parse_number_list<double>(o.alpha, "alpha");
    if (given(sub, "--R"))
        c.R = o.R;
    if (given(sub, "--B"))
        c.B = o.B;
    if (given(sub, "--seed"))
        c.seed = o.seed;
    if (given(sub, "--fixed-k"))
        c.fixed_k = o.fixed_k;
    if (given(sub, "--grid-base"))
        c.grid_base = parse_grid_base(o.grid_base);
    if (given(sub, "--ks"))
        c.grid_ks = parse_number_list<std::size_t>(o.ks, "k");
    if (given(sub, "--p-value-mode"))
        c.p_value_mode = parse_mode(o.p_value_mode);
    if (given(sub, "--threads"))
        threads = o.threads;
    if (given(sub, "--theta"))
        theta = o.theta;
    if (given(sub, "--m")) {
        e.alternatives.clear();
        for (int m : parse_number_list<int>(o.m, "m"))
            e.alternatives.push_back(m == 0 ? std::nullopt : std::optional<AlternativeSpec>(AlternativeSpec{m, 1.5}));
    }
    if (theta)
        for (auto& a : e.alternatives)
            if (a)
                a->theta = *theta;
    c.threads = resolve_threads(threads);
    try {
        c.validate();
        for (const auto& a : e.alternatives)
            if (a)
                a->validate(c.p);
    } catch (const std::invalid_argument& ex) {
        throw InputError(std::string("invalid configuration: ") + ex.what());
    } catch (const std::out_of_range& ex) {
        throw InputError(std::string("invalid configuration: ") + ex.what());
    }
    return e;
}

void emit_report(const ExperimentReport& report, const Options& o, std::ostream& out)
{
    std::ostringstream csv;
    write_report_csv(report, csv, o.timing);
    write_text(o.out, csv.str(), out);
    if (!o.svg.empty()) {
        std::ostringstream svg;
        write_power_svg(report, svg, report.rows.empty() ? 0.05 : report.rows.front().alpha);
        write_text(o.svg, svg.str(), out);
    }
}

int cmd_size(const CLI::App* sub, const Options& o, std::ostream& out)
{
    Experiment e = build_experiment(sub, o);
    for (const auto& a : e.alternatives)
        if (a)
            throw InputError("size runs under the null; --m is only valid with 'power'");
    emit_report(empirical_size(e.config), o, out);
    return kExitOk;
}

int cmd_power(const CLI::App* sub, const Options& o, std::ostream& out)
{
    Experiment e = build_experiment(sub, o);
    if (e.alternatives.empty())
        throw InputError("power needs at least one block size via --m");
    emit_report(size_corrected_power(e.config, e.alternatives), o, out);
    return kExitOk;
}

void add_common(CLI::App* s, Options& o)
{
    s->add_option("--B", o.B, "permutation replicates per test")->capture_default_str();
    s->add_option("--seed", o.seed, "master seed")->capture_default_str();
    s->add_option("--method", o.methods, "comma list: t5, tk=<int>, tgamma=<float>, tc, sc, j, lx, f");
    s->add_option("--ks", o.ks, "explicit diverging k list for T_C (comma list)");
    s->add_option("--fixed-k", o.fixed_k, "small fixed k combined by T_C")->capture_default_str();
    s->add_option("--grid-base", o.grid_base, "dyadic grid fractions of 'pairs' (p*) or 'variables' (p)")
        ->capture_default_str();
    s->add_option("--p-value-mode", o.p_value_mode, "'strict' #{T*>T}/B or 'conservative' (1+#{T*>=T})/(B+1)")
        ->capture_default_str();
    s->add_option("--threads", o.threads, "worker threads (default: LTEST_THREADS, else all cores)");
    s->add_option("--out", o.out, "output file (default: stdout)");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"L-statistic tests of mutual independence", "ltest"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options o;

    auto* test = app.add_subcommand("test", "run tests on a CSV data file and write a JSON report");
    test->add_option("--input", o.input, "CSV file, rows are observations")->required();
    test->add_flag("--header", o.header, "first CSV row holds column names");
    test->add_option("--alpha", o.alpha, "level used for the reject field")->capture_default_str();
    test->add_option("--null", o.null_path, "reuse a cached null ensemble written by 'null'");
    test->add_flag("--timing", o.timing, "embed wall-clock seconds (breaks byte-identical reruns)");
    add_common(test, o);

    auto* null = app.add_subcommand("null", "build and cache a permutation null ensemble as JSON");
    null->add_option("--input", o.input, "CSV file, rows are observations")->required();
    null->add_flag("--header", o.header, "first CSV row holds column names");
    add_common(null, o);

    std::vector<CLI::App*> experiments;
    for (const char* name : {"size", "power"}) {
        auto* s = app.add_subcommand(name, std::string(name) == "size" ? "empirical size under the null (CSV)"
                                                                        : "size-corrected power (CSV, optional SVG)");
        s->add_option("--n", o.n, "sample size")->capture_default_str();
        s->add_option("--p", o.p, "dimension")->capture_default_str();
        s->add_option("--dist", o.dist, "gaussian | uniform | t=<nu>")->capture_default_str();
        s->add_option("--R", o.R, "Monte Carlo replicates")->capture_default_str();
        s->add_option("--alpha", o.alpha, "comma list of levels")->capture_default_str();
        s->add_option("--config", o.config, "JSON config file; command-line flags take precedence");
        s->add_option("--svg", o.svg, "also write an SVG chart");
        s->add_flag("--timing", o.timing, "embed wall-clock seconds (breaks byte-identical reruns)");
        if (std::string(name) == "power") {
            s->add_option("--m", o.m, "comma list of block sizes (0 reruns the null)");
            s->add_option("--theta", o.theta, "block strength")->capture_default_str();
        }
        add_common(s, o);
        experiments.push_back(s);
    }

    std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }

    try {
        if (test->parsed())
            return cmd_test(o, out);
        if (null->parsed())
            return cmd_null(o, out);
        if (experiments[0]->parsed())
            return cmd_size(experiments[0], o, out);
        return cmd_power(experiments[1], o, out);
    } catch (const ParseError& e) {
        err << "error: " << o.input << ": " << e.what() << '\n';
    } catch (const DegenerateColumnError& e) {
        err << "error: " << o.input << ": " << e.what() << '\n';
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
    return kExitInputError;
}

} // namespace ltest::cli
