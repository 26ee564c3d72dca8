#pragma once

// Command-line driver: simulate | check | paths | rotate.
// Exit codes: 0 success, 1 the analysis found the machine cannot be valid,
// 2 bad input.

#include "qsm/basis.hpp"
#include "qsm/builtins.hpp"
#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/paths.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/semantics.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace qsm {

struct RunConfig {
    std::string machine;
    bool extended = false;
    std::size_t steps = 0;
    std::size_t max_len = 6;
    std::string semantics = "path-local";
    std::string omega = "cumulative";
    std::string unitary = "rot-0P(0.3)";
    std::string out;
    std::string json;
    // rotate only
    std::string word;
    std::size_t a = 0;
    std::size_t c = 0;
    std::size_t extra_steps = 4;
};

namespace cli {

inline double eps_from_env()
{
    const char* v = std::getenv("QSM_EPS_AMP");
    if (!v || !*v)
        return kEpsAmp;
    char* end = nullptr;
    double eps = std::strtod(v, &end);
    if (end == v || *end != '\0' || !(eps >= 0))
        throw Error(ErrorCode::ParseError, std::string("QSM_EPS_AMP is not a non-negative number: ") + v);
    return eps;
}

inline RuleTable load_machine(const RunConfig& cfg, double eps, std::ostream& err)
{
    if (cfg.machine.empty())
        throw Error(ErrorCode::ParseError, "--machine is required");
    const std::string prefix = "builtin:";
    RuleTable table = cfg.machine.rfind(prefix, 0) == 0 ? builtin(cfg.machine.substr(prefix.size()))
                                                         : load_table(cfg.machine, eps);
    if (cfg.extended)
        table = lift_to_extended(table);
    auto iso = validate(table);
    if (!iso.is_isometric)
        err << "warning: rule table is not isometric (max column defect " << iso.max_column_defect << ")\n";
    return table;
}

// Writes to the --out file when one is given, otherwise to `fallback`.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback)
{
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::ParseError, "cannot write \"" + path + "\"");
    f << text;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const double eps = eps_from_env();
    auto table = load_machine(cfg, eps, err);
    std::ostringstream os;
    dump_state(evolve(table, cfg.steps, eps), table, os);
    emit(cfg.out, os.str(), out);
    return 0;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const double eps = eps_from_env();
    auto table = load_machine(cfg, eps, err);
    auto state = evolve(table, cfg.steps, eps);
    auto report = machine_report(state, table, cfg.max_len, semantics_from_string(cfg.semantics));
    auto j = to_json(report);
    std::string text = summarize(report);
    if (table.mode() == Mode::Extended) {
        auto inc = incompleteness_check(state, table);
        j["incompleteness"] = {{"liar_probability", inc.liar_probability},
                               {"liar_status", std::string(to_string(inc.liar_status))},
                               {"pn_liar_probability", inc.pn_liar_probability},
                               {"pn_liar_status", std::string(to_string(inc.pn_liar_status))},
                               {"pn_liar_requires_liar", inc.pn_liar_requires_liar},
                               {"cannot_be_valid", inc.cannot_be_valid}};
        text += "incompleteness: " + inc.summary() + "\n";
    }
    out << text;
    if (!cfg.out.empty())
        emit(cfg.out, j.dump(2) + "\n", out);
    return report.cannot_be_valid ? 1 : 0;
}

inline int cmd_paths(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const double eps = eps_from_env();
    auto table = load_machine(cfg, eps, err);
    auto tree = build_path_tree(evolve(table, cfg.steps, eps));
    emit(cfg.out, to_dot(tree), out);
    if (!cfg.json.empty())
        emit(cfg.json, to_json(tree).dump(2) + "\n", out);
    return 0;
}

inline int cmd_rotate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const double eps = eps_from_env();
    auto table = load_machine(cfg, eps, err);
    auto u = parse_unitary(cfg.unitary, table.mode());
    auto variant = omega_from_string(cfg.omega);
    auto semantics = semantics_from_string(cfg.semantics);
    const std::size_t n = cfg.steps, m = cfg.extra_steps;
    auto state = evolve(table, n, eps);

    nlohmann::json j{{"unitary", cfg.unitary}, {"omega", std::string(to_string(variant))}, {"steps", n}};
    std::ostringstream os;
    char buf[64];

    auto defect = commutation_defect(table, u, variant);
    std::snprintf(buf, sizeof buf, "%.6g", defect.max_defect);
    os << "commutation defect (" << to_string(variant) << " omega): " << buf
       << (defect.witness.empty() ? "" : " at " + defect.witness) << '\n';
    os << (defect.max_defect <= kIsometryTol ? "V equals U\n" : "V differs from U\n");
    j["commutation_defect"] = defect.max_defect;

    // Joint amplitude: ~P(X) found at a, X looked for at c after m more steps.
    std::optional<Word> x;
    std::size_t a = cfg.a;
    if (!cfg.word.empty()) {
        x = parse_word(cfg.word, table.mode());
    } else {
        for (const auto& [conf, amp] : state.terms()) {
            for (const auto& occ : contained_occurrences(conf.tape, conf.head_position())) {
                auto form = classify(occ.word, table.mode());
                if (form.kind == SentenceKind::NegativeP) {
                    x = *form.argument;
                    if (a == 0)
                        a = occ.start - 1;
                    break;
                }
            }
            if (x)
                break;
        }
    }
    if (x && a == 0) {
        auto sentence = make_sentence(SentenceKind::NegativeP, *x).word;
        for (const auto& [conf, amp] : state.terms())
            for (const auto& occ : contained_occurrences(conf.tape, conf.head_position()))
                if (a == 0 && occ.word == sentence)
                    a = occ.start - 1;
    }
    if (x && a >= 1) {
        auto rotated = project_negation_and_evolve(state, table, u, *x, a, m);
        auto plain = project_negation_and_evolve(state, table, SiteUnitary::identity(table.mode()), *x, a, m);
        std::size_t c = cfg.c;
        double best = -1;
        if (c == 0) {
            for (std::size_t cc = 1; cc + x->size() + 1 <= n + m; ++cc) {
                double v = joint_amplitude_at(rotated, u, *x, cc);
                if (v > best + 1e-15) {
                    best = v;
                    c = cc;
                }
            }
        }
        if (c >= 1) {
            double r = joint_amplitude_at(rotated, u, *x, c);
            double i = joint_amplitude_at(plain, SiteUnitary::identity(table.mode()), *x, c);
            auto place = joint_placement(*x, a, c);
            os << "joint amplitude for ~P(" << x->text() << ") at [" << place.a << "," << place.b << "] then "
               << x->text() << " at [" << place.c << "," << place.d << "] after " << m << " more steps:\n";
            std::snprintf(buf, sizeof buf, "%.12g", r);
            os << "  rotated basis:  " << buf << '\n';
            std::snprintf(buf, sizeof buf, "%.12g", i);
            os << "  original basis: " << buf << '\n';
            if (i <= 1e-12 && r > 1e-6)
                os << "  nonzero joint amplitude in the rotated basis: U is not valid there\n";
            j["joint"] = {{"word", x->text()}, {"a", place.a}, {"b", place.b},     {"c", place.c},
                          {"d", place.d},      {"extra_steps", m}, {"rotated", r}, {"original", i}};
        }
    } else {
        os << "no ~P sentence printed by step " << n << "; joint amplitude skipped\n";
    }

    auto transport = validity_transport_check(table, u, variant, n, cfg.max_len, semantics);
    if (transport.verdicts_agree) {
        os << "verdicts preserved\n";
    } else {
        os << "verdicts differ in the observer frame:\n";
        for (const auto& dsc : transport.discrepancies)
            os << "  " << dsc.sentence << ": " << to_string(dsc.standard) << " -> " << to_string(dsc.observer) << '\n';
    }
    nlohmann::json disc = nlohmann::json::array();
    for (const auto& dsc : transport.discrepancies)
        disc.push_back({{"sentence", dsc.sentence},
                        {"standard", std::string(to_string(dsc.standard))},
                        {"observer", std::string(to_string(dsc.observer))}});
    j["transport"] = {{"verdicts_agree", transport.verdicts_agree}, {"discrepancies", disc}};

    out << os.str();
    if (!cfg.out.empty())
        emit(cfg.out, j.dump(2) + "\n", out);
    return 0;
}

} // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantum printing machine simulator and logic checker", "qsm"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--machine", cfg.machine, "machine spec JSON file or builtin:NAME")->required();
        sub->add_flag("--extended", cfg.extended, "lift the machine to the extended alphabet");
        sub->add_option("--steps", cfg.steps, "horizon n");
        sub->add_option("--out", cfg.out, "output file");
    };
    auto logic = [&](CLI::App* sub) {
        sub->add_option("--max-sentence-len", cfg.max_len, "sentence length bound L")
            ->check(CLI::Range(std::size_t{5}, std::size_t{64}));
        sub->add_option("--semantics", cfg.semantics, "path-local or global")
            ->check(CLI::IsMember({"path-local", "global"}));
    };

    auto* simulate = app.add_subcommand("simulate", "evolve and dump the state");
    common(simulate);
    auto* check = app.add_subcommand("check", "validity, consistency and completeness report");
    common(check);
    logic(check);
    auto* paths = app.add_subcommand("paths", "word-path tree as DOT (and JSON)");
    common(paths);
    paths->add_option("--json", cfg.json, "also write the tree as JSON");
    auto* rotate = app.add_subcommand("rotate", "basis-change experiments");
    common(rotate);
    logic(rotate);
    rotate->add_option("--omega", cfg.omega, "local or cumulative")->check(CLI::IsMember({"local", "cumulative"}));
    rotate->add_option("--unitary", cfg.unitary, "identity, rot-0P(theta) or a JSON matrix file");
    rotate->add_option("--word", cfg.word, "X for the joint amplitude");
    rotate->add_option("--a", cfg.a, "leading 0 site of ~P(X)");
    rotate->add_option("--c", cfg.c, "leading 0 site of X");
    rotate->add_option("--extra-steps", cfg.extra_steps, "steps m between the two projections");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (simulate->parsed())
            return cli::cmd_simulate(cfg, out, err);
        if (check->parsed())
            return cli::cmd_check(cfg, out, err);
        if (paths->parsed())
            return cli::cmd_paths(cfg, out, err);
        return cli::cmd_rotate(cfg, out, err);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    }
}

} // namespace qsm
