// nlbox — command-line frontend.
//
// Subcommands:
//   simulate     assemble a box from a state, rule and observables; write it
//   check        run the causality checks on a box file or a builtin box
//   sweep        CHSH value of the Bell state across power-rule exponents
//   born-verify  scan the order-consistency equation residual per rule
//   search       look for observables keeping a state order-independent
//
// Exit codes: 0 success / all checks pass, 1 a causality check failed,
// 2 usage error, 3 unreadable or malformed input data, 4 domain error.

#include "nlbox/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDomain = 4;

struct SimulateArgs {
    std::string state = "bell";
    std::string rule = "born";
    std::string observables = "chsh";
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    const nlbox::ParsedState parsed = nlbox::parse_state_spec(args.state);
    if (std::abs(parsed.input_norm - 1.0) > 1e-6)
        std::fprintf(stderr,
                     "warning: input amplitudes had norm %.9g; normalized\n",
                     parsed.input_norm);
    const auto rule = nlbox::parse_rule_spec(args.rule);
    const auto setting = nlbox::parse_observables_spec(args.observables);
    const auto box = nlbox::assemble_box(
        parsed.state, setting.alice, setting.bob, rule,
        "state=" + args.state + ";rule=" + args.rule +
            ";observables=" + args.observables);
    nlbox::write_box_json(box, args.out);
    return kExitOk;
}

struct CheckArgs {
    std::string box = "pr";
    double tol = nlbox::tolerance::report;
};

nlbox::Box<double> load_box(const std::string& spec) {
    if (spec == "pr") return nlbox::pr_box();
    if (spec == "anti-pr") return nlbox::anti_pr_box();
    if (spec == "mixed-order") return nlbox::mixed_order_device();
    return nlbox::read_box_json(spec);
}

int run_check(const CheckArgs& args) {
    const auto box = load_box(args.box);
    const auto report = nlbox::causality_report(box, args.tol);
    const auto doc = nlbox::report_to_json(
        report, nlbox::chsh_value(box, nlbox::Order::AliceFirst),
        nlbox::chsh_value(box, nlbox::Order::BobFirst), box.provenance);
    std::cout << doc.dump(2) << "\n";
    return report.all_pass() ? kExitOk : kExitCheckFailed;
}

struct SweepArgs {
    double m_start = 0.1;
    double m_end = 20.0;
    int steps = 200;
    std::string out;
    std::string svg;
};

int run_sweep(const SweepArgs& args) {
    if (args.steps < 2) throw nlbox::SpecError("--steps must be at least 2");
    if (!(args.m_start > 0) || !(args.m_end > args.m_start))
        throw nlbox::SpecError("need 0 < --m-start < --m-end");
    const auto rows = nlbox::chsh_sweep(args.m_start, args.m_end, args.steps);
    nlbox::emit_sweep_csv(rows, args.out);
    if (!args.svg.empty()) nlbox::emit_sweep_svg(rows, args.svg);
    return kExitOk;
}

struct BornVerifyArgs {
    int grid = 100;
    std::string rules = "born";
    std::string out;
};

int run_born_verify(const BornVerifyArgs& args) {
    std::vector<std::string> specs;
    std::stringstream ss(args.rules);
    std::string item;
    while (std::getline(ss, item, ',')) specs.push_back(item);
    if (specs.empty()) throw nlbox::SpecError("--rules list is empty");

    std::FILE* csv = nullptr;
    if (!args.out.empty()) {
        csv = std::fopen(args.out.c_str(), "w");
        if (!csv)
            throw std::runtime_error("cannot open " + args.out +
                                     " for writing");
        std::fputs("rule,q1,q2,residual\n", csv);
    }
    for (const auto& spec : specs) {
        const auto rule = nlbox::parse_rule_spec(spec);
        const auto scan = nlbox::residual_grid(rule, args.grid);
        std::printf("%-16s max_residual=%.15g argmax=(%.15g, %.15g)\n",
                    spec.c_str(), scan.max_residual, scan.argmax.q1,
                    scan.argmax.q2);
        if (csv)
            for (const auto& rec : scan.records)
                std::fprintf(csv, "%s,%.15g,%.15g,%.15g\n", spec.c_str(),
                             rec.q1, rec.q2, rec.residual);
    }
    if (csv && std::fclose(csv) != 0)
        throw std::runtime_error("failed writing " + args.out);
    return kExitOk;
}

struct SearchArgs {
    std::string state;
    std::string rule;
    int restarts = 32;
    std::uint64_t seed = 1;
    std::string out;
};

int run_search(const SearchArgs& args) {
    const auto parsed = nlbox::parse_state_spec(args.state);
    const auto rule = nlbox::parse_rule_spec(args.rule);
    const auto result =
        nlbox::nco_observable_search(parsed.state, rule, args.restarts, args.seed);
    const auto doc = nlbox::search_result_to_json(result, args.state, args.rule,
                                                  args.restarts, args.seed);
    if (args.out.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open " + args.out +
                                     " for writing");
        out << doc.dump(2) << "\n";
        if (!out.flush()) throw std::runtime_error("failed writing " + args.out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal-box simulator and causality analyzer"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "assemble a box from state, rule and observables");
    simulate->add_option("--state", sim.state,
                         "bell | four re:im pairs for |00>,|01>,|10>,|11>");
    simulate->add_option("--rule", sim.rule, "born | power:m=<real> | step");
    simulate->add_option("--observables", sim.observables,
                         "chsh | 8 angles aT0,aP0,aT1,aP1,bT0,bP0,bT1,bP1");
    simulate->add_option("--out", sim.out, "output box JSON path")->required();

    CheckArgs chk;
    auto* check = app.add_subcommand("check", "run causality checks on a box");
    check->add_option("--box", chk.box, "pr | anti-pr | mixed-order | <path>");
    check->add_option("--tol", chk.tol, "pass/fail tolerance (default 1e-9)");

    SweepArgs swp;
    auto* sweep =
        app.add_subcommand("sweep", "CHSH of the Bell state vs rule exponent");
    sweep->add_option("--m-start", swp.m_start, "first exponent (default 0.1)");
    sweep->add_option("--m-end", swp.m_end, "last exponent (default 20)");
    sweep->add_option("--steps", swp.steps, "grid size (default 200)");
    sweep->add_option("--out", swp.out, "output CSV path")->required();
    sweep->add_option("--svg", swp.svg, "optional SVG chart path");

    BornVerifyArgs bv;
    auto* born_verify = app.add_subcommand(
        "born-verify", "order-consistency residual scan per rule");
    born_verify->add_option("--grid", bv.grid, "grid resolution (default 100)");
    born_verify->add_option("--rules", bv.rules, "comma-separated rule specs");
    born_verify->add_option("--out", bv.out, "optional CSV path");

    SearchArgs sea;
    auto* search = app.add_subcommand(
        "search", "search observables minimizing the order gap");
    search->add_option("--state", sea.state, "state spec")->required();
    search->add_option("--rule", sea.rule, "rule spec")->required();
    search->add_option("--restarts", sea.restarts, "restarts (default 32)");
    search->add_option("--seed", sea.seed, "RNG seed (default 1)");
    search->add_option("--out", sea.out, "result JSON path (stdout if absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (check->parsed()) return run_check(chk);
        if (sweep->parsed()) return run_sweep(swp);
        if (born_verify->parsed()) return run_born_verify(bv);
        if (search->parsed()) return run_search(sea);
    } catch (const nlbox::SpecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const nlbox::DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const nlbox::NotEntangledError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const nlbox::FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const nlbox::AllZeroError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const nlbox::EmptySweepError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
