// cklab command-line front end.
#include <atomic>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <cklab/cklab.hpp>

namespace fs = std::filesystem;
using namespace cklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

const std::set<std::string> kKnownKeys{
    "run.command",          "run.group",           "run.family",          "run.q",
    "run.r",                "run.exp_neg_a",       "run.c1",              "run.p",
    "seed.epsilon",         "seed.weights",        "seed.second_order",   "seed.initial",
    "integrator.rel_tol",   "integrator.abs_tol",  "integrator.max_step", "integrator.initial_step",
    "integrator.blowup_threshold", "integrator.capture_radius", "integrator.approach_radius", "integrator.max_samples",
    "integrator.max_span",  "integrator.chart",    "integrator.direction", "series.order",
    "output.dir",           "output.formats",      "verify.inject_error",
};

struct RunConfig {
    std::string command;
    bool has_group = false;
    GroupSpec group;
    std::optional<Family> family;
    std::vector<double> q{1.0};
    double r = 1.0;
    double c1 = 1.0;
    SeedOptions seed;
    std::optional<State> initial;
    IntegratorOptions integrator;
    Chart chart = Chart::T;
    std::string direction = "both";
    int order = 8;
    std::string out_dir;
    bool csv = true;
    bool json = true;
    bool inject_error = false;
};

// Raised when a required setting is absent, so the caller can print usage.
struct MissingSetting : Error {
    using Error::Error;
};

Family parse_family(GroupTag tag, std::string v) {
    const std::string prefix = tag == GroupTag::SU2 ? "su2_" : "e2_";
    if (v.rfind(prefix, 0) != 0) v = prefix + v;
    for (Family f : {Family::SU2_qq0, Family::SU2_0qq, Family::SU2_q0q, Family::SU2_origin, Family::E2_q0q0,
                     Family::E2_0p0r})
        if (to_string(f) == v) return f;
    throw Error(ErrorCode::InvalidConfig, "run.family: unknown family " + v);
}

Chart parse_chart(const std::string& v) {
    for (Chart c : {Chart::T, Chart::Tau, Chart::R, Chart::Q})
        if (to_string(c) == v) return c;
    throw Error(ErrorCode::InvalidConfig, "integrator.chart: expected t, tau, r or q, got " + v);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (!(x >= 1.0) || x != std::floor(x)) throw Error(ErrorCode::InvalidConfig, key + ": expected a positive integer");
    return static_cast<std::size_t>(x);
}

RunConfig build_config(const ConfigMap& cfg) {
    reject_unknown(cfg, kKnownKeys);
    RunConfig rc;
    const auto get = [&](const std::string& k) -> const std::string* {
        const auto it = cfg.find(k);
        return it == cfg.end() ? nullptr : &it->second;
    };
    if (auto v = get("run.command")) rc.command = *v;
    const double e = get("run.exp_neg_a") ? parse_double("run.exp_neg_a", *get("run.exp_neg_a")) : 1.0;
    if (auto v = get("run.group")) {
        rc.has_group = true;
        if (*v == "heisenberg")
            rc.group = GroupSpec::heisenberg();
        else if (*v == "su2")
            rc.group = GroupSpec::su2(e);
        else if (*v == "e2")
            rc.group = GroupSpec::e2();
        else if (*v == "custom") {
            const auto p = get("run.p") ? parse_list("run.p", *get("run.p")) : std::vector<double>{};
            if (p.size() != 3) throw Error(ErrorCode::InvalidConfig, "run.p: custom group needs p1,p2,p3");
            rc.group = GroupSpec::custom(p[0], p[1], p[2]);
        } else
            throw Error(ErrorCode::InvalidConfig, "run.group: expected heisenberg, su2, e2 or custom, got " + *v);
    }
    if (auto v = get("run.family")) {
        if (!rc.has_group || (rc.group.tag != GroupTag::SU2 && rc.group.tag != GroupTag::E2))
            throw Error(ErrorCode::InvalidConfig, "run.family applies to su2 and e2 only");
        rc.family = parse_family(rc.group.tag, *v);
    }
    if (auto v = get("run.q")) {
        rc.q = parse_list("run.q", *v);
        if (rc.q.empty()) throw Error(ErrorCode::InvalidConfig, "run.q: empty list");
    }
    if (auto v = get("run.r")) rc.r = parse_double("run.r", *v);
    if (auto v = get("run.c1")) rc.c1 = parse_double("run.c1", *v);
    if (auto v = get("seed.epsilon")) rc.seed.epsilon = parse_double("seed.epsilon", *v);
    if (auto v = get("seed.weights")) rc.seed.weights = parse_list("seed.weights", *v);
    if (auto v = get("seed.second_order")) rc.seed.second_order = parse_bool("seed.second_order", *v);
    if (auto v = get("seed.initial")) {
        const auto x = parse_list("seed.initial", *v);
        if (x.size() != 4) throw Error(ErrorCode::InvalidConfig, "seed.initial: expected a,b,c,alpha");
        rc.initial = State{0.0, x[0], x[1], x[2], x[3]};
        require_interior(*rc.initial);
    }
    auto& io = rc.integrator;
    if (auto v = get("integrator.rel_tol")) io.rel_tol = parse_double("integrator.rel_tol", *v);
    if (auto v = get("integrator.abs_tol")) io.abs_tol = parse_double("integrator.abs_tol", *v);
    if (auto v = get("integrator.max_step")) io.max_step = parse_double("integrator.max_step", *v);
    if (auto v = get("integrator.initial_step")) io.initial_step = parse_double("integrator.initial_step", *v);
    if (auto v = get("integrator.blowup_threshold")) io.blowup_threshold = parse_double("integrator.blowup_threshold", *v);
    if (auto v = get("integrator.capture_radius")) io.capture_radius = parse_double("integrator.capture_radius", *v);
    if (auto v = get("integrator.approach_radius")) io.approach_radius = parse_double("integrator.approach_radius", *v);
    if (auto v = get("integrator.max_samples")) io.max_samples = parse_count("integrator.max_samples", *v);
    if (auto v = get("integrator.max_span")) io.max_span = parse_double("integrator.max_span", *v);
    io.validate();
    if (auto v = get("integrator.chart")) rc.chart = parse_chart(*v);
    if (auto v = get("integrator.direction")) {
        if (*v != "both" && *v != "forward" && *v != "backward")
            throw Error(ErrorCode::InvalidConfig, "integrator.direction: expected both, forward or backward");
        rc.direction = *v;
    }
    if (auto v = get("series.order")) rc.order = static_cast<int>(parse_count("series.order", *v));
    if (auto v = get("output.dir")) rc.out_dir = *v;
    if (auto v = get("output.formats")) {
        rc.csv = rc.json = false;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item == "csv")
                rc.csv = true;
            else if (item == "json")
                rc.json = true;
            else
                throw Error(ErrorCode::InvalidConfig, "output.formats: expected csv and/or json, got " + item);
        }
    }
    if (auto v = get("verify.inject_error")) rc.inject_error = parse_bool("verify.inject_error", *v);
    return rc;
}

fs::path output_root(const std::string& flag_dir, const RunConfig& rc) {
    if (!flag_dir.empty()) return flag_dir;
    if (const char* env = std::getenv("CKLAB_OUT"); env && *env) return env;
    if (!rc.out_dir.empty()) return rc.out_dir;
    return "cklab_out";
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

const GroupSpec& need_group(const RunConfig& rc) {
    if (!rc.has_group) throw MissingSetting(ErrorCode::InvalidConfig, "--group is required");
    return rc.group;
}

Family default_family(const RunConfig& rc) {
    if (rc.family) return *rc.family;
    return rc.group.tag == GroupTag::E2 ? Family::E2_q0q0 : Family::SU2_qq0;
}

// ---------------------------------------------------------------- commands

int cmd_equilibria(const RunConfig& rc, const fs::path& out, std::ostream& log) {
    const GroupSpec& g = need_group(rc);
    for (double q : rc.q)
        if (!(q > 0.0)) throw Error(ErrorCode::DegenerateParameter, "q must be positive");
    const auto eqs = list_equilibria(g, rc.q, {rc.r});
    Json arr = Json::array();
    log << "family        a         b         c         alpha     eigenvalues\n";
    for (const auto& e : eqs) {
        const auto lin = linearize(g, e);
        arr.push_back(to_json(e, lin));
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-12s  %-8.4g  %-8.4g  %-8.4g  %-8.4g ", std::string(to_string(e.family)).c_str(),
                      e.point.a, e.point.b, e.point.c, e.point.alpha);
        log << buf;
        for (const auto& z : lin.eigenvalues) {
            std::snprintf(buf, sizeof buf, " %.10g", std::abs(z.real()) < 1e-13 ? 0.0 : z.real());
            log << buf;
            if (z.imag() != 0.0) {
                std::snprintf(buf, sizeof buf, "%+.10gi", z.imag());
                log << buf;
            }
        }
        log << '\n';
    }
    if (rc.json) write_file(out / "equilibria.json", dump(Json{{"group", to_json(g)}, {"equilibria", arr}}));
    return kExitOk;
}

int cmd_integrate(const RunConfig& rc, const fs::path& out, std::ostream& log) {
    const GroupSpec& g = need_group(rc);
    Trajectory tr;
    State seed;
    if (g.tag == GroupTag::Heisenberg && !rc.initial) {
        const HeisenbergSolution sol{rc.c1, 1.0};
        sol.validate();
        std::vector<double> mesh;
        for (int i = 0; i <= 4000; ++i) mesh.push_back(-20.0 + 40.0 * i / 4000.0);
        tr = change_chart(heis_trajectory(sol, mesh), Chart::T);
        seed = tr.samples[tr.size() / 2];
    } else {
        if (rc.initial) {
            seed = *rc.initial;
            if (g.uses_reduced_su2()) seed.alpha = g.exp_neg_A * seed.a * seed.b;
        } else {
            if (g.tag == GroupTag::Custom || g.tag == GroupTag::Heisenberg)
                throw Error(ErrorCode::InvalidConfig, "seed.initial is required for this group");
            if (!(rc.q.front() > 0.0)) throw Error(ErrorCode::DegenerateParameter, "q must be positive");
            const auto e = make_equilibrium(g, default_family(rc), rc.q.front(), rc.r);
            seed = unstable_seed(g, e, linearize(g, e), rc.seed);
        }
        if (rc.direction == "both")
            tr = integrate_both(g, seed, rc.integrator);
        else
            tr = integrate(g, seed, rc.direction == "forward" ? Direction::Forward : Direction::Backward, rc.integrator);
    }
    tr = change_chart(tr, rc.chart);
    if (rc.csv) {
        std::ostringstream os;
        write_trajectory_csv(os, tr);
        write_file(out / "trajectory.csv", os.str());
    }
    if (rc.json) write_file(out / "trajectory.json", dump(trajectory_sidecar(tr, seed)));
    log << "samples " << tr.size() << "\nleft  " << to_string(tr.left.kind) << " at " << fmt17(tr.left.value)
        << "\nright " << to_string(tr.right.kind) << " at " << fmt17(tr.right.value) << '\n';
    return kExitOk;
}

int cmd_classify(const RunConfig& rc, const fs::path& out, std::ostream& log) {
    const GroupSpec& g = need_group(rc);
    SeedSpec spec;
    spec.seed = rc.seed;
    spec.integrator = rc.integrator;
    spec.series_order = rc.order;
    spec.c1 = rc.c1;
    spec.q = rc.q.front();
    spec.r = rc.r;
    if (rc.initial) {
        spec.source = SeedSource::Explicit;
        spec.initial = *rc.initial;
    } else if (g.tag == GroupTag::Heisenberg) {
        spec.source = SeedSource::ClosedForm;
    } else {
        if (g.tag == GroupTag::Custom) throw Error(ErrorCode::InvalidConfig, "seed.initial is required for this group");
        spec.family = default_family(rc);
    }
    const auto rep = classify(g, spec);
    const std::string text = to_text(rep);
    if (rc.json) write_file(out / "classification.json", dump(to_json(rep)));
    write_file(out / "classification.txt", text);
    log << text;
    return kExitOk;
}

int cmd_verify(const RunConfig& rc, const fs::path& out, std::ostream& log) {
    VerifyOptions vo;
    vo.order = rc.order;
    vo.inject_error = rc.inject_error;
    const auto rep = run_verify(vo);
    Json arr = Json::array();
    for (const auto& c : rep.checks) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-4s %-44s %.3e <= %.0e%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value,
                      c.threshold, c.control ? "  (negative control)" : "");
        log << buf;
        arr.push_back(Json{{"name", c.name}, {"value", num(c.value)}, {"threshold", c.threshold}, {"pass", c.pass},
                           {"control", c.control}});
    }
    log << (rep.passed() ? "all checks passed\n" : "verification failed\n");
    if (rc.json) write_file(out / "verify.json", dump(Json{{"order", rc.order}, {"passed", rep.passed()}, {"checks", arr}}));
    return rep.passed() ? kExitOk : kExitVerify;
}

int dispatch(const RunConfig& rc, const fs::path& out, std::ostream& log) {
    if (rc.command == "equilibria") return cmd_equilibria(rc, out, log);
    if (rc.command == "integrate") return cmd_integrate(rc, out, log);
    if (rc.command == "classify") return cmd_classify(rc, out, log);
    if (rc.command == "verify") return cmd_verify(rc, out, log);
    throw Error(ErrorCode::InvalidConfig, "run.command: expected equilibria, integrate, classify or verify");
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidOptions:
        case ErrorCode::NonpositiveState:
        case ErrorCode::NonpositiveFactor:
        case ErrorCode::UnsupportedGroup:
        case ErrorCode::UnsupportedLambda:
        case ErrorCode::DegenerateParameter: return kExitConfig;
        default: return kExitInternal;
    }
}

// Runs one configured command, turning exceptions into exit codes.
int guarded(const std::function<int()>& body, std::ostream& err, const std::string& usage = {}) {
    try {
        return body();
    } catch (const MissingSetting& e) {
        err << "error: " << e.what() << '\n' << usage;
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

ConfigMap load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path);
    return parse_config(is);
}

int cmd_batch(const std::vector<std::string>& files, std::size_t jobs, const std::string& flag_dir) {
    struct Result {
        int code = 0;
        std::string log;
    };
    std::vector<Result> results(files.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            std::ostringstream log;
            results[i].code = guarded(
                [&] {
                    const RunConfig rc = build_config(load_config(files[i]));
                    if (rc.command.empty()) throw Error(ErrorCode::InvalidConfig, files[i] + ": run.command is required");
                    const fs::path out = output_root(flag_dir, rc) / fs::path(files[i]).stem();
                    return dispatch(rc, out, log);
                },
                log);
            results[i].log = log.str();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::max<std::size_t>(1, std::min(jobs, files.size())); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int worst = kExitOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::cout << "== " << files[i] << " (exit " << results[i].code << ")\n" << results[i].log;
        worst = std::max(worst, results[i].code);
    }
    return worst;
}

// Flags that map onto config keys; given flags override the file.
struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

const FlagSpec kRunFlags[] = {
    {"--group", "run.group", "heisenberg, su2, e2 or custom"},
    {"--family", "run.family", "equilibrium family: qq0, 0qq, q0q, origin (su2); q0q0, 0p0r (e2)"},
    {"--q", "run.q", "equilibrium parameter q (comma list for equilibria)"},
    {"--r", "run.r", "second parameter of the e2 family (0,p,0,r)"},
    {"--exp-neg-a", "run.exp_neg_a", "su2 constant e^{-A} (>= 0)"},
    {"--c1", "run.c1", "bolt value of the explicit heisenberg family"},
    {"--p", "run.p", "structure constants p1,p2,p3 for a custom group"},
    {"--epsilon", "seed.epsilon", "distance of the seed from the equilibrium"},
    {"--weights", "seed.weights", "weights within the unstable eigenspace"},
    {"--second-order", "seed.second_order", "quadratic unstable-manifold correction (true/false)"},
    {"--initial", "seed.initial", "explicit initial state a,b,c,alpha"},
    {"--rel-tol", "integrator.rel_tol", "relative tolerance"},
    {"--abs-tol", "integrator.abs_tol", "absolute tolerance"},
    {"--max-step", "integrator.max_step", "largest step"},
    {"--initial-step", "integrator.initial_step", "first step"},
    {"--blowup-threshold", "integrator.blowup_threshold", "norm treated as blowup"},
    {"--capture-radius", "integrator.capture_radius", "relative radius for equilibrium capture"},
    {"--approach-radius", "integrator.approach_radius", "relative radius for a near-miss capture"},
    {"--max-samples", "integrator.max_samples", "sample cap per direction"},
    {"--max-span", "integrator.max_span", "largest coordinate span per direction"},
    {"--chart", "integrator.chart", "export chart: t, tau, r or q"},
    {"--direction", "integrator.direction", "both, forward or backward"},
    {"--order", "series.order", "series order"},
    {"--formats", "output.formats", "csv and/or json"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cklab: centrally flat Kahler metrics of cohomogeneity one"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    ConfigMap flags;
    std::string config_path, out_dir;
    bool inject_error = false;
    std::vector<std::string> batch_files;
    std::size_t jobs = 1;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--out", out_dir, "output root (overrides CKLAB_OUT and output.dir)");
        for (const auto& f : kRunFlags)
            sub->add_option_function<std::string>(
                f.flag, [&flags, key = std::string(f.key)](const std::string& v) { flags[key] = v; }, f.help);
    };
    CLI::App* eq = app.add_subcommand("equilibria", "list equilibria and their spectra");
    CLI::App* in = app.add_subcommand("integrate", "integrate a solution and export it");
    CLI::App* cl = app.add_subcommand("classify", "completeness verdict for one solution");
    CLI::App* ve = app.add_subcommand("verify", "residual report for closed forms, series and cross-checks");
    CLI::App* ba = app.add_subcommand("batch", "run several config files");
    for (CLI::App* s : {eq, in, cl, ve}) add_common(s);
    ve->add_flag("--inject-error", inject_error, "add negative controls that must fail");
    ba->add_option("configs", batch_files, "config files, each with run.command")->required();
    ba->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
    ba->add_option("--out", out_dir, "output root");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (ba->parsed()) return cmd_batch(batch_files, jobs, out_dir);

    CLI::App* sub = app.get_subcommands().front();
    return guarded(
        [&] {
            ConfigMap cfg = config_path.empty() ? ConfigMap{} : load_config(config_path);
            for (const auto& [k, v] : flags) cfg[k] = v;
            if (inject_error) cfg["verify.inject_error"] = "true";
            cfg["run.command"] = sub->get_name();
            const RunConfig rc = build_config(cfg);
            return dispatch(rc, output_root(out_dir, rc), std::cout);
        },
        std::cerr, sub->help());
}
