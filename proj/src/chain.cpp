// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/chain.hpp"

#include <chrono>

namespace bvscan::chain {

ChainSpec make_chain(enc::Encoding stage1, enc::Encoding stage2, const std::string& bridge) {
    if (!stage1.output_var) {
        throw ChainError("first stage has no output value: " + stage1.description);
    }
    const auto& vars = stage2.formula.free_vars();
    const auto it = vars.find(bridge);
    if (it == vars.end()) {
        throw ChainError("bridge input '" + bridge + "' is not a variable of the second stage");
    }
    const unsigned out_width = stage1.output_term().width();
    if (it->second != out_width) {
        throw ChainError("bridge width mismatch: output is " + std::to_string(out_width) + " bits, '" + bridge +
                         "' is " + std::to_string(it->second));
    }
    std::string label = stage1.cwe + "->" + stage2.cwe;
    return ChainSpec{.stage1 = std::move(stage1), .stage2 = std::move(stage2), .bridge = bridge, .label = label};
}

bv::Formula compose(const ChainSpec& spec) {
    const bv::Term out = spec.stage1.output_term();
    const auto& vars2 = spec.stage2.formula.free_vars();
    const auto bridge = vars2.find(spec.bridge);
    if (bridge == vars2.end() || bridge->second != out.width()) {
        throw ChainError("bridge '" + spec.bridge + "' does not match the first stage's output width");
    }
    for (const auto& [name, width] : spec.stage1.formula.free_vars()) {
        const auto other = vars2.find(name);
        if (name != spec.bridge && other != vars2.end() && other->second != width) {
            throw ChainError("variable '" + name + "' has different widths in the two stages");
        }
    }
    return bv::conj({spec.stage1.formula, bv::replace(spec.stage2.formula, {{spec.bridge, out}})});
}

std::vector<ChainSpec> enumerate_chains(const std::vector<enc::Encoding>& encodings) {
    std::vector<ChainSpec> out;
    for (size_t i = 0; i < encodings.size(); ++i) {
        if (!encodings[i].output_var) {
            continue;
        }
        const unsigned width = encodings[i].output_term().width();
        for (size_t j = 0; j < encodings.size(); ++j) {
            if (i == j) {
                continue;
            }
            for (const auto& input : encodings[j].bridge_inputs) {
                const auto& vars = encodings[j].formula.free_vars();
                const auto it = vars.find(input);
                if (it == vars.end() || it->second != width) {
                    continue;
                }
                ChainSpec spec = make_chain(encodings[i], encodings[j], input);
                try {
                    (void)compose(spec);
                } catch (const ChainError&) {
                    continue; // shared names with conflicting widths
                }
                spec.stage1_index = i;
                spec.stage2_index = j;
                out.push_back(std::move(spec));
            }
        }
    }
    return out;
}

ChainVerdict run_chain(const ChainSpec& spec, const solver::SolveBudget& budget, uint64_t seed) {
    const bv::Formula joint = compose(spec);
    const auto start = std::chrono::steady_clock::now();
    solver::Verdict verdict = solver::check(joint, budget, seed);
    // The reported time covers the chain query only; stage checks are audits.
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    ChainVerdict out{
        .verdict = std::move(verdict),
        .stage1 = solver::check(spec.stage1.formula, budget, seed),
        .stage2 = solver::check(spec.stage2.formula, budget, seed),
        .solve_time_ms = ms,
    };
    if (!out.verdict.sat()) {
        return out;
    }
    if (out.stage1.unsat() || out.stage2.unsat()) {
        throw ChainInconsistency("chain " + spec.label + " is satisfiable but a stage alone is not");
    }
    const bv::Assignment& w = out.verdict.witness;
    // A variable the composition folded away is unconstrained; any value works.
    const auto at = [&w](const std::string& name) {
        const auto it = w.find(name);
        return it == w.end() ? uint64_t{0} : it->second;
    };
    bv::Assignment first;
    for (const auto& [name, width] : spec.stage1.formula.free_vars()) {
        first[name] = at(name);
    }
    if (!bv::eval_formula(spec.stage1.formula, first)) {
        throw ChainInconsistency("chain witness does not satisfy stage one of " + spec.label);
    }
    out.bridge_value = bv::eval_term(spec.stage1.output_term(), first);
    bv::Assignment second;
    for (const auto& [name, width] : spec.stage2.formula.free_vars()) {
        second[name] = name == spec.bridge ? *out.bridge_value : at(name);
    }
    if (!bv::eval_formula(spec.stage2.formula, second)) {
        throw ChainInconsistency("chain witness does not satisfy stage two of " + spec.label);
    }
    return out;
}

} // namespace bvscan::chain
