// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace bvscan::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is
// rethrown after all workers finish.
template <typename Fn>
void parallel_for(size_t n, unsigned jobs, Fn fn) {
    const size_t workers = std::min<size_t>(std::max(1U, jobs), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::string numbered(const char* prefix, size_t n) {
    std::ostringstream out;
    out << prefix << '-' << std::setw(4) << std::setfill('0') << n;
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string site_str(const fe::SourceSpan& s) { return s.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column); }

void add(Counts& c, solver::Outcome o) {
    switch (o) {
    case solver::Outcome::Sat: ++c.sat; break;
    case solver::Outcome::Unsat: ++c.unsat; break;
    case solver::Outcome::Unknown: ++c.unknown; break;
    }
}

json counts_json(const Counts& c) {
    return json{{"total", c.total()}, {"sat", c.sat}, {"unsat", c.unsat}, {"unknown", c.unknown}};
}

json hex_json(const HexAssignment& values) {
    json out = json::object();
    for (const auto& [name, value] : values) {
        out[name] = value;
    }
    return out;
}

json time_json(const Report& r, double ms) { return r.reproducible ? json(nullptr) : json(ms); }

} // namespace

std::string StageRef::str() const {
    return site_str(site) + " " + kind + (variant.empty() ? "" : "/" + variant);
}

Summary summarize(const Report& r) {
    Summary s;
    std::map<std::string, Counts> cwe;
    for (const auto& f : r.findings) {
        add(s.findings, f.outcome);
        add(cwe[f.cwe], f.outcome);
    }
    s.by_cwe.assign(cwe.begin(), cwe.end());
    for (const auto& c : r.chains) {
        add(s.chains, c.outcome);
    }
    s.errors = r.errors.size();
    return s;
}

std::vector<std::string> collect_sources(const std::vector<std::string>& paths, std::vector<FileError>& errors) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::recursive_directory_iterator(p, ec)) {
                if (entry.is_regular_file() && entry.path().extension() == ".c") {
                    found.push_back(entry.path().string());
                }
            }
            if (ec) {
                errors.push_back({p, "cannot list directory: " + ec.message()});
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p, ec)) {
            out.push_back(p);
        } else {
            errors.push_back({p, "no such file or directory"});
        }
    }
    return out;
}

Collected collect(const std::vector<std::string>& paths, const ScanOptions& options) {
    Collected out;
    for (const auto& file : collect_sources(paths, out.errors)) {
        try {
            const fe::TranslationUnit unit = fe::load_source(read_file(file), file, options.model);
            for (const auto& s : unit.skipped) {
                out.skipped.push_back({s.span, s.function, s.reason});
            }
            for (const auto& c : ex::extract(unit, options.model)) {
                try {
                    for (auto& e : enc::encode_candidate(c, options.encoder)) {
                        out.encodings.push_back({c.site, c.function, c.kind, std::move(e)});
                    }
                } catch (const enc::EncodingError& err) {
                    out.errors.push_back({file, site_str(c.site) + ": " + ex::kind_name(c.kind) + ": " + err.what()});
                }
            }
        } catch (const fe::FrontendError& err) {
            out.errors.push_back({file, err.what()});
        } catch (const std::exception& err) {
            out.errors.push_back({file, err.what()});
        }
    }
    return out;
}

HexAssignment to_hex(const bv::Assignment& values, const std::map<std::string, unsigned>& widths) {
    HexAssignment out;
    for (const auto& [name, value] : values) {
        const auto w = widths.find(name);
        out.emplace_back(name, bv::hex(value, w == widths.end() ? 64 : w->second));
    }
    return out;
}

Report solve_encodings(const Collected& collected, const ScanOptions& options) {
    Report r;
    r.data_model = options.model.label;
    r.budget = options.budget;
    r.seed = options.seed;
    r.reproducible = options.reproducible;
    r.generated_at = options.reproducible ? "" : utc_timestamp();
    r.errors = collected.errors;
    r.skipped = collected.skipped;

    const auto& encs = collected.encodings;
    r.findings.resize(encs.size());
    if (!options.dump_dir.empty()) {
        fs::create_directories(options.dump_dir);
    }
    parallel_for(encs.size(), options.jobs, [&](size_t i) {
        const SiteEncoding& se = encs[i];
        const enc::Encoding& e = se.encoding;
        Finding& f = r.findings[i];
        f.id = numbered("BVS", i + 1);
        f.cwe = e.cwe;
        f.threat_tag = e.threat_tag;
        f.site = se.site;
        f.function = se.function;
        f.kind = ex::kind_name(se.kind);
        f.variant = e.variant;
        f.severity = e.severity;
        f.description = e.description;
        if (!options.dump_dir.empty()) {
            f.smt2_file = (fs::path(options.dump_dir) / (f.id + ".smt2")).string();
            std::ofstream out(f.smt2_file);
            out << "; " << f.id << " " << site_str(f.site) << " " << f.kind << (f.variant.empty() ? "" : "/" + f.variant)
                << " " << f.cwe << "\n"
                << solver::emit_smtlib(e.formula);
        }
        const auto start = std::chrono::steady_clock::now();
        const solver::Verdict v = solver::check(e.formula, options.budget, options.seed);
        f.solve_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        f.outcome = v.outcome;
        f.reason = v.reason;
        if (v.sat()) {
            f.witness = to_hex(v.witness, e.formula.free_vars());
            for (const auto& [name, term] : e.defs) {
                try {
                    f.defined.emplace_back(name, bv::hex(bv::eval_term(term, v.witness), term.width()));
                } catch (const bv::MissingVar&) {
                    // a definition over variables the formula no longer mentions
                }
            }
        }
    });
    return r;
}

Report scan(const std::vector<std::string>& paths, const ScanOptions& options) {
    return solve_encodings(collect(paths, options), options);
}

std::vector<ChainFinding> run_chains(const std::vector<SiteEncoding>& encodings, uint64_t sink_bound,
                                     const ScanOptions& options) {
    std::set<unsigned> widths;
    std::map<std::string, std::vector<size_t>> by_file;
    for (size_t i = 0; i < encodings.size(); ++i) {
        by_file[encodings[i].site.file].push_back(i);
        if (encodings[i].encoding.output_var) {
            widths.insert(encodings[i].encoding.output_term().width());
        }
    }
    std::vector<enc::Encoding> sinks;
    std::vector<StageRef> sink_refs;
    for (const unsigned w : widths) {
        sinks.push_back(enc::encode_oob_sink(w, sink_bound));
        sink_refs.push_back({fe::SourceSpan{.file = "<sink>", .line = 0, .column = 0, .length = 0}, "OobSink",
                             std::to_string(w) + "bit", "CWE-125"});
    }

    // Bridges only join sites of one file: equal names in different files are
    // unrelated variables.
    struct Job {
        chain::ChainSpec spec;
        StageRef stage1;
        StageRef stage2;
    };
    std::vector<Job> jobs;
    for (const auto& [file, members] : by_file) {
        std::vector<enc::Encoding> pool;
        std::vector<StageRef> refs;
        for (const size_t i : members) {
            const SiteEncoding& se = encodings[i];
            pool.push_back(se.encoding);
            refs.push_back({se.site, ex::kind_name(se.kind), se.encoding.variant, se.encoding.cwe});
        }
        pool.insert(pool.end(), sinks.begin(), sinks.end());
        refs.insert(refs.end(), sink_refs.begin(), sink_refs.end());
        for (auto& spec : chain::enumerate_chains(pool)) {
            const size_t a = spec.stage1_index;
            const size_t b = spec.stage2_index;
            jobs.push_back({std::move(spec), refs[a], refs[b]});
        }
    }

    std::vector<ChainFinding> out(jobs.size());
    parallel_for(jobs.size(), options.jobs, [&](size_t i) {
        const chain::ChainSpec& spec = jobs[i].spec;
        const chain::ChainVerdict cv = chain::run_chain(spec, options.budget, options.seed);
        ChainFinding& c = out[i];
        c.id = numbered("CHN", i + 1);
        c.label = spec.label;
        c.stage1 = jobs[i].stage1;
        c.stage2 = jobs[i].stage2;
        c.bridge = spec.bridge;
        c.outcome = cv.verdict.outcome;
        c.stage1_outcome = cv.stage1.outcome;
        c.stage2_outcome = cv.stage2.outcome;
        c.solve_time_ms = cv.solve_time_ms;
        if (cv.verdict.sat()) {
            c.witness = to_hex(cv.verdict.witness, chain::compose(spec).free_vars());
            c.bridge_value = bv::hex(*cv.bridge_value, spec.stage1.output_term().width());
        }
    });
    return out;
}

std::string to_json(const Report& r) {
    const Summary s = summarize(r);
    json doc;
    doc["tool"] = "bvscan";
    doc["version"] = r.tool_version;
    doc["generated_at"] = r.reproducible ? json(nullptr) : json(r.generated_at);
    doc["data_model"] = r.data_model;
    doc["budget"] = {{"max_wall_time_s", r.budget.max_wall_time}, {"max_conflicts", r.budget.max_conflicts}};
    doc["seed"] = r.seed;

    json summary;
    summary["findings"] = counts_json(s.findings);
    json by_cwe = json::object();
    for (const auto& [cwe, counts] : s.by_cwe) {
        by_cwe[cwe] = counts_json(counts);
    }
    summary["by_cwe"] = by_cwe;
    summary["chains"] = counts_json(s.chains);
    summary["errors"] = s.errors;
    summary["skipped_regions"] = r.skipped.size();
    doc["summary"] = summary;

    json findings = json::array();
    for (const auto& f : r.findings) {
        json j;
        j["id"] = f.id;
        j["file"] = f.site.file;
        j["line"] = f.site.line;
        j["column"] = f.site.column;
        j["function"] = f.function;
        j["kind"] = f.kind;
        j["variant"] = f.variant;
        j["cwe"] = f.cwe;
        j["threat"] = f.threat_tag;
        j["severity"] = f.severity;
        j["verdict"] = solver::outcome_name(f.outcome);
        j["witness"] = f.witness ? hex_json(*f.witness) : json(nullptr);
        j["defined"] = hex_json(f.defined);
        j["description"] = f.description;
        j["solve_time_ms"] = time_json(r, f.solve_time_ms);
        if (!f.reason.empty()) {
            j["reason"] = f.reason;
        }
        if (!f.smt2_file.empty()) {
            j["smt2"] = f.smt2_file;
        }
        findings.push_back(j);
    }
    doc["findings"] = findings;

    json chains = json::array();
    for (const auto& c : r.chains) {
        const auto stage = [](const StageRef& ref, solver::Outcome o) {
            return json{{"site", site_str(ref.site)}, {"kind", ref.kind}, {"variant", ref.variant},
                        {"cwe", ref.cwe},         {"verdict", solver::outcome_name(o)}};
        };
        json j;
        j["id"] = c.id;
        j["label"] = c.label;
        j["stage1"] = stage(c.stage1, c.stage1_outcome);
        j["stage2"] = stage(c.stage2, c.stage2_outcome);
        j["bridge"] = c.bridge;
        j["verdict"] = solver::outcome_name(c.outcome);
        j["witness"] = c.witness ? hex_json(*c.witness) : json(nullptr);
        j["bridge_value"] = c.bridge_value ? json(*c.bridge_value) : json(nullptr);
        j["solve_time_ms"] = time_json(r, c.solve_time_ms);
        chains.push_back(j);
    }
    doc["chains"] = chains;

    json guards = json::array();
    for (const auto& g : r.guards) {
        json j;
        j["variable"] = g.spec.variable;
        j["direction"] = guard::direction_name(g.spec.direction);
        j["threshold"] = bv::hex(g.spec.threshold, g.spec.width);
        j["threshold_decimal"] = g.spec.threshold;
        j["width"] = g.spec.width;
        j["source_encoding"] = g.spec.source_encoding;
        j["solver_calls"] = g.spec.solver_calls;
        j["unsafe_neighbor"] = bv::hex(g.spec.unsafe_neighbor, g.spec.width);
        j["derivation_time_ms"] = time_json(r, g.spec.derivation_time_ms);
        if (g.bench) {
            const auto& b = *g.bench;
            j["bench"] = {{"safe", b.safe_count},
                          {"unsafe", b.unsafe_count},
                          {"false_positives", b.false_positives},
                          {"false_negatives", b.false_negatives},
                          {"mean_ns", time_json(r, b.mean_ns)},
                          {"median_ns", time_json(r, b.median_ns)},
                          {"p99_ns", time_json(r, b.p99_ns)},
                          {"throughput_per_s", time_json(r, b.throughput)}};
        }
        guards.push_back(j);
    }
    doc["guards"] = guards;

    json errors = json::array();
    for (const auto& e : r.errors) {
        errors.push_back({{"file", e.file}, {"message", e.message}});
    }
    doc["errors"] = errors;

    json skipped = json::array();
    for (const auto& k : r.skipped) {
        skipped.push_back({{"site", site_str(k.site)}, {"function", k.function}, {"reason", k.reason}});
    }
    doc["skipped"] = skipped;
    return doc.dump(2) + "\n";
}

namespace {

std::string witness_text(const std::optional<HexAssignment>& w) {
    if (!w) {
        return "-";
    }
    std::string out;
    for (const auto& [name, value] : *w) {
        out += (out.empty() ? "" : " ") + name + "=" + value;
    }
    return out;
}

// Left-aligned cells padded to their width; an overlong cell still gets one
// separating space so the row stays whitespace-splittable.
void row(std::ostream& out, std::initializer_list<std::pair<std::string, size_t>> cells) {
    for (const auto& [text, width] : cells) {
        out << text << std::string(text.size() < width ? width - text.size() : 1, ' ');
    }
}

} // namespace

std::string to_text(const Report& r) {
    std::ostringstream out;
    out << "bvscan " << r.tool_version << "  data model " << r.data_model << "  budget " << r.budget.max_wall_time
        << " s/query\n";
    if (!r.findings.empty()) {
        out << '\n';
        row(out, {{"ID", 10}, {"Target", 44}, {"Kind", 18}, {"Variant", 8}, {"CWE", 9}, {"Verdict", 8}, {"Severity", 9}});
        out << "Witness\n";
        for (const auto& f : r.findings) {
            row(out, {{f.id, 10},
                      {site_str(f.site), 44},
                      {f.kind, 18},
                      {f.variant.empty() ? "-" : f.variant, 8},
                      {f.cwe, 9},
                      {solver::outcome_name(f.outcome), 8},
                      {f.severity, 9}});
            out << witness_text(f.witness) << '\n';
        }
    }
    if (!r.chains.empty()) {
        out << '\n';
        row(out, {{"Chain", 10}, {"Label", 18}, {"Verdict", 8}});
        out << "Stages\n";
        for (const auto& c : r.chains) {
            row(out, {{c.id, 10}, {c.label, 18}, {solver::outcome_name(c.outcome), 8}});
            out << c.stage1.str() << " => " << c.stage2.str() << " via " << c.bridge;
            if (c.bridge_value) {
                out << " = " << *c.bridge_value;
            }
            out << '\n';
        }
    }
    for (const auto& g : r.guards) {
        out << "\nguard " << g.spec.variable << ' ' << guard::direction_name(g.spec.direction) << ' '
            << g.spec.threshold << " (" << bv::hex(g.spec.threshold, g.spec.width) << ", " << g.spec.width
            << " bits, " << g.spec.solver_calls << " solver calls)\n";
        if (g.bench) {
            const auto& b = *g.bench;
            out << std::left << std::setw(12) << "  safe" << b.safe_count << "\n"
                << std::setw(12) << "  unsafe" << b.unsafe_count << "\n"
                << std::setw(12) << "  FP/FN" << b.false_positives << "/" << b.false_negatives << "\n"
                << std::fixed << std::setprecision(2) << std::setw(12) << "  mean ns" << b.mean_ns << "\n"
                << std::setw(12) << "  median ns" << b.median_ns << "\n"
                << std::setw(12) << "  p99 ns" << b.p99_ns << "\n"
                << std::setw(12) << "  checks/s" << std::setprecision(0) << b.throughput << "\n";
        }
    }
    for (const auto& e : r.errors) {
        out << "\nerror: " << e.file << ": " << e.message;
    }
    if (!r.errors.empty()) {
        out << '\n';
    }
    const Summary s = summarize(r);
    out << "\nsummary: " << s.findings.total() << " findings (" << s.findings.sat << " sat, " << s.findings.unsat
        << " unsat, " << s.findings.unknown << " unknown)";
    if (s.chains.total() > 0) {
        out << ", " << s.chains.total() << " chains (" << s.chains.sat << " sat)";
    }
    out << ", " << s.errors << " errors\n";
    return out.str();
}

int exit_code(const Report& r) {
    const Summary s = summarize(r);
    if (s.errors > 0 || s.findings.unknown > 0 || s.chains.unknown > 0) {
        return 2;
    }
    return s.findings.sat > 0 || s.chains.sat > 0 ? 1 : 0;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace bvscan::report
