#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ndelie/classify.hpp"
#include "ndelie/detsys.hpp"
#include "ndelie/flowverify.hpp"
#include "ndelie/ndesolve.hpp"
#include "ndelie/parse.hpp"
#include "ndelie/suite.hpp"

using namespace ndelie;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kMalformed = 1, kOutOfTaxonomy = 2, kWarnings = 3 };

struct Config {
    std::string spec_path;
    std::string instance;
    std::string theta;
    std::string T;
    int steps = 64;
    std::vector<double> deltas{-0.25, 0.25};
    double tol_inf = 1e-6;
    double tol_fin = 1e-4;
    bool json = false;
    std::string only;
    std::string out;
    std::vector<std::string> gens;
    std::string rho_seed = "sin(t)";
    std::string omega, upsilon;
    int per_step = 1;
};

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double number(const std::string& text) {
    double v = eval_at(parse(text), 0, {});
    if (!std::isfinite(v)) throw Usage("not a finite number: " + text);
    return v;
}

struct Loaded {
    NdeSpec spec;
    std::string theta;
};

Loaded load(const Config& cfg) {
    Loaded l;
    if (!cfg.instance.empty()) {
        const auto* in = find_instance(cfg.instance);
        if (!in) throw Usage("no built-in instance " + cfg.instance);
        l.spec = in->spec;
        l.theta = in->theta;
    } else if (!cfg.spec_path.empty()) {
        l.spec = load_spec(cfg.spec_path);
        l.theta = "sin(t)";
    } else {
        throw Usage("--spec or --instance is required");
    }
    if (!cfg.theta.empty()) l.theta = cfg.theta;
    return l;
}

double end_time(const Config& cfg, const NdeSpec& spec) {
    if (!cfg.T.empty()) return number(cfg.T);
    if (spec.t_end) return *spec.t_end;
    return spec.t0 + 3 * spec.r.value();
}

void check_numeric(const Config& cfg) {
    if (cfg.steps < 16) throw Usage("--steps must be at least 16");
    if (!(cfg.tol_inf > 0) || !(cfg.tol_fin > 0)) throw Usage("tolerances must be positive");
    for (double d : cfg.deltas)
        if (!std::isfinite(d)) throw Usage("delta grid must be finite");
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

/// Prints the report and mirrors it into --out as <name>.json and <name>.txt.
void emit(const Config& cfg, const std::string& name, const json& j, const std::string& text) {
    std::cout << (cfg.json ? j.dump(2) + "\n" : text);
    if (cfg.out.empty()) return;
    std::filesystem::create_directories(cfg.out);
    write_file(std::filesystem::path(cfg.out) / (name + ".json"), j.dump(2) + "\n");
    write_file(std::filesystem::path(cfg.out) / (name + ".txt"), text);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

// ---------------------------------------------------------------- classify

int cmd_classify(const Config& cfg) {
    auto l = load(cfg);
    auto res = classify(l.spec);
    json j = to_json(res);
    j["spec"] = spec_to_json(l.spec);
    emit(cfg, "classify", j, render_text(res));
    if (!res.case_id) return kOutOfTaxonomy;
    return res.warnings.empty() ? kOk : kWarnings;
}

// ---------------------------------------------------------------- determine

int cmd_determine(const Config& cfg) {
    auto l = load(cfg);
    NdeSpec spec = l.spec;
    std::vector<std::string> warnings;
    if (!spec.a.is_zero()) {
        spec = remove_first_derivative(spec).spec;
        warnings.push_back("a != 0 removed by x = s(t) u; rows refer to u");
    }
    if (!spec.h.is_zero()) {
        spec.h = CoeffDescriptor::zero();
        warnings.push_back("h != 0 dropped; rows are for the homogeneous equation");
    }
    json j;
    std::ostringstream text;
    if (!cfg.omega.empty() || !cfg.upsilon.empty()) {
        InfinitesimalAnsatz a{parse(cfg.omega.empty() ? "0" : cfg.omega), parse(cfg.upsilon.empty() ? "0" : cfg.upsilon), {}};
        auto sys = split(invariance_residual(spec, a), spec, a);
        j["ansatz"] = to_json(sys);
        text << "ansatz omega = " << a.omega.str() << ", upsilon = " << a.upsilon.str() << "\n" << render_text(sys);
    } else {
        auto generic = generic_system(spec);
        auto reduced = reduce_ansatz(generic, spec);
        auto canonical = canonical_constraints(reduced, spec);
        j["generic"] = to_json(generic);
        j["reduced"] = to_json(reduced);
        j["canonical"] = to_json(canonical);
        text << "== generic ansatz\n" << render_text(generic) << "== omega = beta(t), upsilon = gamma(t) x + rho(t)\n"
             << render_text(reduced) << "== in terms of omega\n" << render_text(canonical);
    }
    j["warnings"] = warnings;
    for (const auto& w : warnings) text << "warning: " << w << "\n";
    emit(cfg, "determine", j, text.str());
    return warnings.empty() ? kOk : kWarnings;
}

// ---------------------------------------------------------------- integrate

int cmd_integrate(const Config& cfg) {
    check_numeric(cfg);
    auto l = load(cfg);
    double T = end_time(cfg, l.spec);
    auto traj = integrate(l.spec, InitialFunction::parse(l.theta), T, cfg.steps);
    double res = residual(traj, l.spec, interior_samples(traj));
    json j{{"theta", l.theta}, {"T", traj.T}, {"steps_per_delay", traj.N}, {"h", traj.h}, {"nodes", traj.nodes()},
           {"residual", res}, {"x_end", traj(traj.T, 0)}};
    std::ostringstream text;
    text << "integrated " << l.theta << " on [" << traj.lo() << ", " << traj.T << "], h = " << traj.h << "\n"
         << "max residual " << fmt(res) << ", x(T) = " << std::setprecision(12) << traj(traj.T, 0) << "\n";
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream csv(std::filesystem::path(cfg.out) / "trajectory.csv");
        traj.write_csv(csv, cfg.per_step);
        j["csv"] = "trajectory.csv";
    }
    emit(cfg, "integrate", j, text.str());
    return kOk;
}

// ---------------------------------------------------------------- verify

Generator user_generator(const std::string& text, int n) {
    auto cut = text.find(';');
    if (cut == std::string::npos) throw Usage("--gen expects \"omega;upsilon\", got " + text);
    Generator g;
    g.label = "user" + std::to_string(n);
    g.omega = parse(text.substr(0, cut));
    g.upsilon = parse(text.substr(cut + 1));
    g.note = "user supplied";
    return g;
}

void write_curve(const std::filesystem::path& p, const TransformedCurve& tc, int per) {
    std::ofstream os(p);
    os << "tbar,xbar,xbarprime,xbarsecond\n";
    os.precision(17);
    int n = per * 400;
    for (int i = 0; i <= n; ++i) {
        double t = tc.lo() + (tc.hi() - tc.lo()) * i / n;
        os << t << ',' << tc(t, 0) << ',' << tc(t, 1) << ',' << tc(t, 2) << '\n';
    }
}

std::string label_file(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return s;
}

int cmd_verify(const Config& cfg) {
    check_numeric(cfg);
    auto l = load(cfg);
    auto cr = classify(l.spec);
    NdeSpec spec = cr.spec;
    spec.t_end = l.spec.t_end;
    double T = end_time(cfg, l.spec);
    auto traj = integrate(spec, InitialFunction::parse(l.theta), T, cfg.steps);
    auto rho = solve_homogeneous_slot(spec, InitialFunction::parse(cfg.rho_seed), T, 4 * cfg.steps);

    std::vector<Generator> gens;
    if (cfg.gens.empty()) {
        for (const auto& g : cr.generators) gens.push_back(g);
    } else {
        for (size_t i = 0; i < cfg.gens.size(); ++i) gens.push_back(user_generator(cfg.gens[i], int(i) + 1));
    }

    VerifyOptions vo;
    vo.deltas = cfg.deltas;
    vo.tol_inf = cfg.tol_inf;
    vo.tol_fin = cfg.tol_fin;
    json reports = json::array();
    std::ostringstream text;
    text << "case " << (cr.case_id ? case_name(*cr.case_id) : std::string("out of taxonomy")) << ", theta = " << l.theta
         << ", N = " << cfg.steps << ", rho seed " << cfg.rho_seed << "\n";
    bool all = true;
    for (const auto& g : gens) {
        auto rep = verify_generator(traj, g, spec, &rho, vo);
        bool counted = g.status == Generator::Status::Admitted;
        if (counted && !rep.passed()) all = false;
        json jr = to_json(rep);
        jr["status"] = status_name(g.status);
        reports.push_back(jr);
        text << "  " << (rep.passed() ? "pass" : "FAIL") << "  " << std::left << std::setw(10) << g.label << " "
             << g.render() << "  inf " << fmt(rep.infinitesimal_residual) << "  fin " << fmt(rep.finite_residual)
             << (counted ? "" : "  (candidate)") << "\n";
        if (!cfg.out.empty()) {
            std::filesystem::create_directories(cfg.out);
            GeneratorField field(g, check_functions(spec, g, &rho));
            for (double d : cfg.deltas) {
                try {
                    auto tc = transform_solution(traj, field, d, vo.flow);
                    std::ostringstream name;
                    name << "curve_" << label_file(g.label) << "_" << d << ".csv";
                    write_curve(std::filesystem::path(cfg.out) / name.str(), tc, 1);
                } catch (const std::exception&) {
                }
            }
        }
    }
    for (const auto& w : cr.warnings) text << "warning: " << w << "\n";
    json j{{"case", cr.case_id ? json(case_name(*cr.case_id)) : json(nullptr)},
           {"theta", l.theta},
           {"T", traj.T},
           {"steps_per_delay", cfg.steps},
           {"deltas", cfg.deltas},
           {"rho_seed", cfg.rho_seed},
           {"reports", reports},
           {"all_passed", all},
           {"warnings", cr.warnings}};
    emit(cfg, "verify", j, text.str());
    if (!all) return kWarnings;
    return cr.case_id ? kOk : kOutOfTaxonomy;
}

// ---------------------------------------------------------------- paper-suite

struct Row {
    std::string id;
    json j;
    std::string text;
    bool passed = false;
};

std::vector<std::pair<double, double>> axiom_points(const NdeSpec& s) {
    std::vector<std::pair<double, double>> pts;
    double r = s.r.value();
    for (int i = 0; i < 6; ++i) pts.emplace_back(s.t0 + r * (0.2 + 0.45 * i), -1.5 + 0.6 * i);
    return pts;
}

Row run_instance(const SuiteInstance& in, const Config& cfg) {
    Row row;
    row.id = in.id;
    std::ostringstream text;
    json gens = json::array();
    bool ok = true;
    try {
        auto cr = classify(in.spec);
        bool case_ok = cr.case_id == in.expected;
        ok = case_ok;
        double T = *in.spec.t_end;
        auto traj = integrate(in.spec, InitialFunction::parse(in.theta), T, cfg.steps);
        auto rho = solve_homogeneous_slot(in.spec, InitialFunction::parse(cfg.rho_seed), T, 4 * cfg.steps);
        VerifyOptions vo;
        vo.deltas = cfg.deltas;
        vo.tol_inf = cfg.tol_inf;
        vo.tol_fin = cfg.tol_fin;
        int admitted = 0;
        for (const auto* g : cr.admitted()) {
            ++admitted;
            auto rep = verify_generator(traj, *g, in.spec, &rho, vo);
            json jg = to_json(rep);
            bool closed = g->kind == Generator::Kind::Closed && g->bindings.coeffs.empty();
            std::vector<FnAtom> atoms;
            fn_atoms(g->upsilon, atoms);
            for (const auto& a : atoms)
                if (a.name == "rho") closed = false;
            std::string axioms = "-";
            if (closed) {
                auto ax = group_axioms(GeneratorField(*g, in.spec.functions()), axiom_points(in.spec), 0.3, 0.4);
                jg["axioms"] = to_json(ax);
                axioms = ax.passed() ? "ok" : "FAIL";
                if (!ax.passed()) ok = false;
            }
            if (!rep.passed()) ok = false;
            gens.push_back(jg);
            text << "      " << (rep.passed() ? "pass" : "FAIL") << "  " << std::left << std::setw(8) << g->label << " "
                 << g->render() << "  inf " << fmt(rep.infinitesimal_residual) << "  fin " << fmt(rep.finite_residual)
                 << "  axioms " << axioms << "\n";
        }
        row.j = {{"id", in.id},
                 {"expected", in.expected ? json(case_name(*in.expected)) : json(nullptr)},
                 {"case", cr.case_id ? json(case_name(*cr.case_id)) : json(nullptr)},
                 {"case_ok", case_ok},
                 {"admitted", admitted},
                 {"candidates", int(cr.generators.size()) - admitted},
                 {"theta", in.theta},
                 {"note", in.note},
                 {"spec", spec_to_json(in.spec)},
                 {"generators", gens},
                 {"warnings", cr.warnings}};
        std::ostringstream head;
        head << std::left << std::setw(5) << in.id << " " << std::setw(4) << (ok ? "ok" : "FAIL") << " case "
             << (cr.case_id ? case_name(*cr.case_id) : std::string("-")) << (case_ok ? "" : " (expected other)")
             << ", " << admitted << " admitted, " << cr.generators.size() - size_t(admitted) << " candidates"
             << (in.note.empty() ? "" : "   " + in.note) << "\n";
        row.text = head.str() + text.str();
    } catch (const std::exception& e) {
        ok = false;
        row.j = {{"id", in.id}, {"error", e.what()}};
        row.text = in.id + " FAIL " + e.what() + "\n";
    }
    row.j["passed"] = ok;
    row.passed = ok;
    return row;
}

int cmd_paper_suite(const Config& cfg) {
    check_numeric(cfg);
    std::vector<const SuiteInstance*> chosen;
    for (const auto& in : paper_suite())
        if (cfg.only.empty() || in.id == cfg.only) chosen.push_back(&in);
    if (chosen.empty()) throw Usage("--only: no instance " + cfg.only);

    std::vector<std::future<Row>> jobs;
    for (const auto* in : chosen) jobs.push_back(std::async(std::launch::async, run_instance, std::cref(*in), std::cref(cfg)));
    std::vector<Row> rows;
    for (auto& f : jobs) rows.push_back(f.get());

    std::ostringstream text;
    text << "suite: arbitrary constants pinned to 1, r = 1 unless the instance needs a period-compatible delay;\n"
         << "N = " << cfg.steps << " steps per delay, deltas";
    for (double d : cfg.deltas) text << " " << d;
    text << ", tol_inf " << cfg.tol_inf << ", tol_fin " << cfg.tol_fin << ", rho seed " << cfg.rho_seed << "\n\n";
    json arr = json::array();
    int passed = 0;
    for (const auto& r : rows) {
        text << r.text;
        arr.push_back(r.j);
        passed += r.passed;
    }
    text << "\n" << passed << "/" << rows.size() << " scenarios passed\n";
    json j{{"header",
            {{"constants", "arbitrary constants pinned to 1"},
             {"steps_per_delay", cfg.steps},
             {"deltas", cfg.deltas},
             {"tol_inf", cfg.tol_inf},
             {"tol_fin", cfg.tol_fin},
             {"rho_seed", cfg.rho_seed}}},
           {"scenarios", arr},
           {"passed", passed},
           {"total", rows.size()}};
    emit(cfg, "paper_suite", j, text.str());
    return passed == int(rows.size()) ? kOk : kWarnings;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lie point symmetries of second-order linear neutral delay equations"};
    app.require_subcommand(1);
    Config cfg;

    auto spec_opts = [&](CLI::App* c) {
        c->add_option("--spec", cfg.spec_path, "equation spec (JSON)");
        c->add_option("--instance", cfg.instance, "built-in suite instance instead of --spec (C1..C12, Ex1, Ex2)");
        c->add_flag("--json", cfg.json, "print JSON instead of text");
        c->add_option("--out", cfg.out, "directory for report files");
    };
    auto numeric_opts = [&](CLI::App* c) {
        c->add_option("--theta", cfg.theta, "initial function on [t0 - r, t0]");
        c->add_option("--T", cfg.T, "end time, a whole number of delays after t0");
        c->add_option("--steps", cfg.steps, "steps per delay (N >= 16)");
    };
    auto check_opts = [&](CLI::App* c) {
        c->add_option("--delta", cfg.deltas, "group parameter values for the finite check");
        c->add_option("--tol-inf", cfg.tol_inf, "infinitesimal tolerance");
        c->add_option("--tol-fin", cfg.tol_fin, "finite tolerance");
        c->add_option("--rho-seed", cfg.rho_seed, "initial function for the rho binding");
    };

    auto* classify_cmd = app.add_subcommand("classify", "classify the equation and list its generators");
    spec_opts(classify_cmd);
    auto* determine_cmd = app.add_subcommand("determine", "determining equations, split by jet monomials");
    spec_opts(determine_cmd);
    determine_cmd->add_option("--omega", cfg.omega, "ansatz omega(t, x); default: the generic ansatz");
    determine_cmd->add_option("--upsilon", cfg.upsilon, "ansatz upsilon(t, x)");
    auto* integrate_cmd = app.add_subcommand("integrate", "method-of-steps solution, CSV into --out");
    spec_opts(integrate_cmd);
    numeric_opts(integrate_cmd);
    integrate_cmd->add_option("--per-step", cfg.per_step, "CSV rows per grid interval");
    auto* verify_cmd = app.add_subcommand("verify", "infinitesimal and finite invariance checks");
    spec_opts(verify_cmd);
    numeric_opts(verify_cmd);
    check_opts(verify_cmd);
    verify_cmd->add_option("--gen", cfg.gens, "generator \"omega;upsilon\" (repeatable); default: classified ones");
    auto* suite_cmd = app.add_subcommand("paper-suite", "one instance per case C1..C12 plus Ex1 and Ex2");
    suite_cmd->add_option("--only", cfg.only, "run a single instance");
    suite_cmd->add_flag("--json", cfg.json, "print JSON instead of text");
    suite_cmd->add_option("--out", cfg.out, "directory for report files");
    suite_cmd->add_option("--steps", cfg.steps, "steps per delay (N >= 16)");
    check_opts(suite_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kMalformed;
    }

    try {
        if (classify_cmd->parsed()) return cmd_classify(cfg);
        if (determine_cmd->parsed()) return cmd_determine(cfg);
        if (integrate_cmd->parsed()) return cmd_integrate(cfg);
        if (verify_cmd->parsed()) return cmd_verify(cfg);
        if (suite_cmd->parsed()) return cmd_paper_suite(cfg);
    } catch (const SpecError& e) {
        std::cerr << "malformed spec: " << e.what() << "\n";
        return kMalformed;
    } catch (const SymbolicError& e) {
        std::cerr << "malformed expression: " << e.what() << "\n";
        return kMalformed;
    } catch (const Usage& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kMalformed;
    } catch (const SolveError& e) {
        std::cerr << "integration: " << e.what() << "\n";
        return kMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    }
    return kMalformed;
}
