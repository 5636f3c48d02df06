// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT

// Command-line front end: scan, chain, guard, policy and dump-smt2.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvscan/policy.hpp"
#include "bvscan/report.hpp"

namespace {

using namespace bvscan;

constexpr int kExitError = 2;

struct Common {
    std::vector<std::string> paths;
    std::string data_model = "ilp32";
    double budget_seconds = 60;
    unsigned jobs = 1;
    std::string dump_dir;
    std::string format = "json";
    uint64_t seed = 0;
    std::string out;
    bool reproducible = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_paths = true) {
    if (with_paths) {
        cmd->add_option("paths", c.paths, "C source files or directories (searched for *.c)")->required();
    }
    cmd->add_option("--data-model", c.data_model, "Integer widths of the target")
        ->check(CLI::IsMember({"ilp32", "lp64"}, CLI::ignore_case))
        ->capture_default_str();
    cmd->add_option("--budget-seconds", c.budget_seconds, "Wall-clock limit per solver query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--jobs", c.jobs, "Solver queries run at once")->check(CLI::Range(1U, 1024U))->capture_default_str();
    cmd->add_option("--seed", c.seed, "Solver seed")->capture_default_str();
    cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    cmd->add_option("--out", c.out, "Write the report here instead of standard output");
    cmd->add_flag("--reproducible", c.reproducible, "Omit timestamps and timings from the report");
}

report::ScanOptions options_of(const Common& c) {
    report::ScanOptions o;
    o.model = fe::DataModel::from_label(c.data_model);
    o.budget.max_wall_time = c.budget_seconds;
    o.jobs = c.jobs;
    o.dump_dir = c.dump_dir;
    o.seed = c.seed;
    o.reproducible = c.reproducible;
    return o;
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + c.out);
    }
    f << text;
}

std::string render(const Common& c, const report::Report& r) {
    return c.format == "text" ? report::to_text(r) : report::to_json(r);
}

int run_scan(const Common& c) {
    const report::Report r = report::scan(c.paths, options_of(c));
    emit(c, render(c, r));
    return report::exit_code(r);
}

int run_chain(const Common& c, uint64_t sink_bound) {
    const report::ScanOptions o = options_of(c);
    const report::Collected collected = report::collect(c.paths, o);
    report::Report r = report::solve_encodings(collected, o);
    r.chains = report::run_chains(collected.encodings, sink_bound, o);
    emit(c, render(c, r));
    return report::exit_code(r);
}

struct GuardArgs {
    uint32_t line = 0;
    std::string kind;
    std::string variant;
    std::string variable;
    std::string direction;
    std::vector<std::string> bindings;
    bool bench = false;
    size_t n_safe = 2000;
    size_t n_unsafe = 2000;
};

uint64_t parse_number(const std::string& text) {
    size_t used = 0;
    const uint64_t v = std::stoull(text, &used, 0);
    if (used != text.size()) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return v;
}

int run_guard(const Common& c, const GuardArgs& g) {
    const report::ScanOptions o = options_of(c);
    const report::Collected collected = report::collect(c.paths, o);
    if (!collected.errors.empty()) {
        for (const auto& e : collected.errors) {
            std::cerr << "error: " << e.file << ": " << e.message << '\n';
        }
        return kExitError;
    }
    std::vector<const report::SiteEncoding*> matches;
    for (const auto& se : collected.encodings) {
        if (se.site.line == g.line && ex::kind_name(se.kind) == g.kind &&
            (g.variant.empty() || se.encoding.variant == g.variant)) {
            matches.push_back(&se);
        }
    }
    if (matches.size() != 1) {
        std::cerr << "error: " << matches.size() << " encodings match line " << g.line << " kind " << g.kind
                  << (g.variant.empty() ? "" : " variant " + g.variant) << "; exactly one is needed\n";
        for (const auto* m : matches) {
            std::cerr << "  " << m->site.str() << " variant '" << m->encoding.variant << "'\n";
        }
        return kExitError;
    }
    bv::Assignment bindings;
    for (const auto& b : g.bindings) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--bind expects NAME=VALUE, got '" + b + "'");
        }
        bindings[b.substr(0, eq)] = parse_number(b.substr(eq + 1));
    }
    const report::SiteEncoding& se = *matches.front();
    const std::string source_id = se.site.str() + " " + g.kind + (se.encoding.variant.empty() ? "" : "/" + se.encoding.variant);
    report::GuardRecord record{
        .spec = guard::derive_guard(se.encoding, g.variable, guard::direction_from_name(g.direction), bindings,
                                    o.budget, source_id),
    };
    if (g.bench) {
        record.bench = guard::run_bench(record.spec, g.n_safe, g.n_unsafe, c.seed);
    }
    report::Report r;
    r.data_model = o.model.label;
    r.budget = o.budget;
    r.seed = o.seed;
    r.reproducible = o.reproducible;
    r.generated_at = o.reproducible ? "" : report::utc_timestamp();
    r.guards.push_back(std::move(record));
    emit(c, render(c, r));
    return 0;
}

int run_policy(const std::string& actions_file, const std::string& config_file, const std::string& log_file) {
    const policy::PolicyConfig config = policy::parse_config(kv::parse_file(config_file));
    std::ofstream log;
    if (!log_file.empty()) {
        log.open(log_file, std::ios::app);
        if (!log) {
            throw std::runtime_error("cannot append to " + log_file);
        }
    }
    bool unsafe = false;
    for (const auto& record : kv::parse_file(actions_file)) {
        const policy::ActionRecord action = policy::parse_action(record);
        const policy::Decision d = policy::evaluate(action, config);
        unsafe = unsafe || d.verdict == policy::Verdict::Unsafe;
        const std::string line = policy::log_line(action, d, report::utc_timestamp());
        std::cout << line << '\n';
        if (log.is_open()) {
            log << line << '\n';
        }
    }
    return unsafe ? 1 : 0;
}

int run_dump(const Common& c, const std::string& dir) {
    const report::Collected collected = report::collect(c.paths, options_of(c));
    std::filesystem::create_directories(dir);
    size_t n = 0;
    for (const auto& se : collected.encodings) {
        char id[16];
        std::snprintf(id, sizeof id, "BVS-%04zu", ++n);
        const auto path = std::filesystem::path(dir) / (std::string(id) + ".smt2");
        std::ofstream f(path);
        f << "; " << id << " " << se.site.str() << " " << ex::kind_name(se.kind)
          << (se.encoding.variant.empty() ? "" : "/" + se.encoding.variant) << " " << se.encoding.cwe << "\n"
          << solver::emit_smtlib(se.encoding.formula);
        std::cout << path.string() << '\n';
    }
    for (const auto& e : collected.errors) {
        std::cerr << "error: " << e.file << ": " << e.message << '\n';
    }
    return collected.errors.empty() ? 0 : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bvscan: bitvector SMT checks for integer weaknesses in C"};
    app.set_version_flag("--version", std::string("bvscan ") + BVSCAN_VERSION);
    app.require_subcommand(1);

    Common scan_args;
    auto* scan = app.add_subcommand("scan", "Find candidate sites, encode them and solve each one");
    add_common(scan, scan_args);
    scan->add_option("--dump-smt2", scan_args.dump_dir, "Also write one .smt2 file per finding into DIR");

    Common chain_args;
    uint64_t sink_bound = 4096;
    auto* chain = app.add_subcommand("chain", "Scan, then compose two-stage chains through shared values");
    add_common(chain, chain_args);
    chain->add_option("--dump-smt2", chain_args.dump_dir, "Also write one .smt2 file per finding into DIR");
    chain->add_option("--sink-bound", sink_bound, "Length bound of the out-of-bounds sink added per width")
        ->capture_default_str();

    Common guard_common;
    GuardArgs guard_args;
    std::string guard_file;
    auto* guard = app.add_subcommand("guard", "Derive a one-comparison input guard from a finding, optionally bench it");
    add_common(guard, guard_common, false);
    guard->add_option("file", guard_file, "C source file")->required()->check(CLI::ExistingFile);
    guard->add_option("--line", guard_args.line, "Line of the finding")->required();
    guard->add_option("--kind", guard_args.kind, "Pattern kind of the finding, e.g. MulOverflow")->required();
    guard->add_option("--variant", guard_args.variant, "Variant when a site has several encodings");
    guard->add_option("--var", guard_args.variable, "Input variable to guard")->required();
    guard->add_option("--direction", guard_args.direction, "Which side of the threshold is safe")
        ->required()
        ->check(CLI::IsMember({"safe-min", "safe-max"}));
    guard->add_option("--bind", guard_args.bindings, "Fix another input, NAME=VALUE (repeatable)");
    guard->add_flag("--bench", guard_args.bench, "Time the runtime check on random safe and unsafe inputs");
    guard->add_option("--n-safe", guard_args.n_safe, "Safe benchmark inputs")->capture_default_str();
    guard->add_option("--n-unsafe", guard_args.n_unsafe, "Unsafe benchmark inputs")->capture_default_str();

    std::string actions_file;
    std::string config_file;
    std::string log_file;
    auto* pol = app.add_subcommand("policy", "Evaluate agent actions against the six-constraint policy");
    pol->add_option("actions", actions_file, "Action records, one per line")->required()->check(CLI::ExistingFile);
    pol->add_option("--config", config_file, "Authorized scope and approved manifest")
        ->required()
        ->check(CLI::ExistingFile);
    pol->add_option("--log", log_file, "Append decision records to this file");

    Common dump_args;
    std::string dump_dir;
    auto* dump = app.add_subcommand("dump-smt2", "Write each encoding as SMT-LIB v2 without solving");
    dump->add_option("paths", dump_args.paths, "C source files or directories")->required();
    dump->add_option("--data-model", dump_args.data_model, "Integer widths of the target")
        ->check(CLI::IsMember({"ilp32", "lp64"}, CLI::ignore_case))
        ->capture_default_str();
    dump->add_option("--out", dump_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*scan) {
            return run_scan(scan_args);
        }
        if (*chain) {
            return run_chain(chain_args, sink_bound);
        }
        if (*guard) {
            guard_common.paths = {guard_file};
            return run_guard(guard_common, guard_args);
        }
        if (*pol) {
            return run_policy(actions_file, config_file, log_file);
        }
        if (*dump) {
            return run_dump(dump_args, dump_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
