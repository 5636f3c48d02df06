// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bvscan/sat.hpp"

namespace bvscan::sat {

std::string Cnf::to_dimacs() const {
    std::ostringstream os;
    os << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
    for (const auto& c : clauses) {
        for (const int l : c) {
            os << l << ' ';
        }
        os << "0\n";
    }
    return os.str();
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
    for (const auto& c : cnf.clauses) {
        const bool ok = std::any_of(c.begin(), c.end(), [&](int l) {
            const auto v = static_cast<size_t>(std::abs(l));
            return v < model.size() && model[v] == (l > 0);
        });
        if (!ok) {
            return false;
        }
    }
    return true;
}

uint64_t luby(uint64_t i) {
    uint64_t size = 1;
    unsigned seq = 0;
    while (size < i + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != i) {
        size = (size - 1) >> 1;
        --seq;
        i = i % size;
    }
    return uint64_t{1} << seq;
}

namespace {

using Lit = uint32_t;
constexpr uint32_t no_reason = std::numeric_limits<uint32_t>::max();
constexpr uint64_t restart_unit = 64;

constexpr Lit make_lit(uint32_t var, bool negative) { return 2 * var + (negative ? 1 : 0); }
constexpr uint32_t var_of(Lit l) { return l >> 1; }
constexpr Lit negated(Lit l) { return l ^ 1; }
constexpr bool is_negative(Lit l) { return (l & 1) != 0; }

enum Value : int8_t { False = 0, True = 1, Undef = 2 };

struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0;
};

struct Watch {
    uint32_t cref;
    Lit blocker;
};

class Cdcl {
  public:
    Cdcl(const Cnf& cnf, const SolveBudget& budget, uint64_t seed, Clock::time_point deadline)
        : budget_(budget), deadline_(deadline), nvars_(static_cast<uint32_t>(cnf.num_vars)) {
        assigns_.assign(nvars_, Undef);
        level_.assign(nvars_, 0);
        reason_.assign(nvars_, no_reason);
        activity_.assign(nvars_, 0.0);
        phase_.assign(nvars_, false);
        seen_.assign(nvars_, 0);
        heap_index_.assign(nvars_, -1);
        watches_.resize(2 * static_cast<size_t>(nvars_));
        if (seed != 0) {
            std::mt19937_64 rng(seed);
            for (auto&& p : phase_) {
                p = (rng() & 1) != 0;
            }
        }
        for (uint32_t v = 0; v < nvars_; ++v) {
            heap_insert(v);
        }
        for (const auto& c : cnf.clauses) {
            if (!add_input_clause(c)) {
                ok_ = false;
                break;
            }
        }
    }

    SatResult run() {
        SatResult result;
        if (!ok_ || propagate() != no_reason) {
            result.status = SatStatus::Unsat;
            result.stats = stats_;
            return result;
        }
        max_learnts_ = std::max<double>(static_cast<double>(clauses_.size()) / 3.0, 1000.0);
        for (uint64_t restart = 0;; ++restart) {
            const uint64_t limit = luby(restart) * restart_unit;
            const SatStatus st = search(limit, result.reason);
            if (st == SatStatus::Sat) {
                result.status = st;
                result.model.assign(static_cast<size_t>(nvars_) + 1, false);
                for (uint32_t v = 0; v < nvars_; ++v) {
                    result.model[v + 1] = assigns_[v] == True;
                }
                break;
            }
            if (st == SatStatus::Unsat || !result.reason.empty()) {
                result.status = st;
                break;
            }
            ++stats_.restarts;
            max_learnts_ *= 1.05;
        }
        result.stats = stats_;
        return result;
    }

  private:
    // Returns false when the clause set is already unsatisfiable.
    bool add_input_clause(const std::vector<int>& dimacs) {
        std::vector<Lit> lits;
        lits.reserve(dimacs.size());
        for (const int l : dimacs) {
            const auto v = static_cast<uint32_t>(std::abs(l));
            if (l == 0 || v > nvars_) {
                throw std::invalid_argument("literal out of range: " + std::to_string(l));
            }
            lits.push_back(make_lit(v - 1, l < 0));
        }
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (size_t i = 1; i < lits.size(); ++i) {
            if (lits[i] == negated(lits[i - 1])) {
                return true; // tautology
            }
        }
        // Drop literals already false at level 0; satisfied clauses are dropped entirely.
        std::vector<Lit> kept;
        for (const Lit l : lits) {
            const Value v = value(l);
            if (v == True) {
                return true;
            }
            if (v == Undef) {
                kept.push_back(l);
            }
        }
        if (kept.empty()) {
            return false;
        }
        if (kept.size() == 1) {
            enqueue(kept[0], no_reason);
            return true;
        }
        attach(Clause{.lits = std::move(kept)});
        return true;
    }

    uint32_t attach(Clause c) {
        const auto cref = static_cast<uint32_t>(clauses_.size());
        watches_[negated(c.lits[0])].push_back({cref, c.lits[1]});
        watches_[negated(c.lits[1])].push_back({cref, c.lits[0]});
        clauses_.push_back(std::move(c));
        return cref;
    }

    [[nodiscard]] Value value(Lit l) const {
        const Value v = assigns_[var_of(l)];
        if (v == Undef) {
            return Undef;
        }
        return static_cast<Value>(static_cast<int8_t>(v) ^ static_cast<int8_t>(is_negative(l)));
    }

    [[nodiscard]] uint32_t decision_level() const { return static_cast<uint32_t>(trail_lim_.size()); }

    void enqueue(Lit l, uint32_t reason) {
        const uint32_t v = var_of(l);
        assigns_[v] = is_negative(l) ? False : True;
        level_[v] = decision_level();
        reason_[v] = reason;
        trail_.push_back(l);
    }

    // Returns the conflicting clause or no_reason.
    uint32_t propagate() {
        uint32_t conflict = no_reason;
        while (qhead_ < trail_.size()) {
            const Lit p = trail_[qhead_++];
            ++stats_.propagations;
            auto& ws = watches_[p];
            const Lit false_lit = negated(p);
            size_t i = 0;
            size_t j = 0;
            while (i < ws.size()) {
                const Watch w = ws[i];
                if (value(w.blocker) == True) {
                    ws[j++] = ws[i++];
                    continue;
                }
                Clause& c = clauses_[w.cref];
                if (c.deleted) {
                    ++i;
                    continue;
                }
                if (c.lits[0] == false_lit) {
                    std::swap(c.lits[0], c.lits[1]);
                }
                ++i;
                const Lit first = c.lits[0];
                if (first != w.blocker && value(first) == True) {
                    ws[j++] = {w.cref, first};
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < c.lits.size(); ++k) {
                    if (value(c.lits[k]) != False) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[negated(c.lits[1])].push_back({w.cref, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) {
                    continue;
                }
                ws[j++] = {w.cref, first};
                if (value(first) == False) {
                    conflict = w.cref;
                    qhead_ = trail_.size();
                    while (i < ws.size()) {
                        ws[j++] = ws[i++];
                    }
                } else {
                    enqueue(first, w.cref);
                }
            }
            ws.resize(j);
            if (conflict != no_reason) {
                break;
            }
        }
        return conflict;
    }

    // First-UIP conflict analysis. Fills `learnt` with the asserting literal
    // first and returns the backjump level.
    uint32_t analyze(uint32_t conflict, std::vector<Lit>& learnt) {
        learnt.clear();
        learnt.push_back(0); // placeholder for the asserting literal
        int pending = 0;
        Lit p = 0;
        bool have_p = false;
        size_t index = trail_.size();
        uint32_t cref = conflict;
        for (;;) {
            Clause& c = clauses_[cref];
            if (c.learnt) {
                bump_clause(c);
            }
            for (size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
                const Lit q = c.lits[k];
                const uint32_t v = var_of(q);
                if (seen_[v] == 0 && level_[v] > 0) {
                    bump_var(v);
                    seen_[v] = 1;
                    if (level_[v] >= decision_level()) {
                        ++pending;
                    } else {
                        learnt.push_back(q);
                    }
                }
            }
            do {
                --index;
            } while (seen_[var_of(trail_[index])] == 0);
            p = trail_[index];
            have_p = true;
            cref = reason_[var_of(p)];
            seen_[var_of(p)] = 0;
            if (--pending <= 0) {
                break;
            }
            // The reason clause keeps its implied literal at position 0.
            if (clauses_[cref].lits[0] != p) {
                auto& lits = clauses_[cref].lits;
                std::swap(*std::find(lits.begin(), lits.end(), p), lits[0]);
            }
        }
        learnt[0] = negated(p);

        // Local minimization: drop literals implied by other literals of the clause.
        to_clear_.assign(learnt.begin(), learnt.end());
        size_t kept = 1;
        for (size_t k = 1; k < learnt.size(); ++k) {
            const uint32_t r = reason_[var_of(learnt[k])];
            bool redundant = r != no_reason;
            if (redundant) {
                for (const Lit q : clauses_[r].lits) {
                    const uint32_t v = var_of(q);
                    if (v != var_of(learnt[k]) && seen_[v] == 0 && level_[v] > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant) {
                learnt[kept++] = learnt[k];
            }
        }
        learnt.resize(kept);
        for (const Lit l : to_clear_) {
            seen_[var_of(l)] = 0;
        }

        if (learnt.size() == 1) {
            return 0;
        }
        size_t max_i = 1;
        for (size_t k = 2; k < learnt.size(); ++k) {
            if (level_[var_of(learnt[k])] > level_[var_of(learnt[max_i])]) {
                max_i = k;
            }
        }
        std::swap(learnt[1], learnt[max_i]);
        return level_[var_of(learnt[1])];
    }

    void backtrack(uint32_t level) {
        if (decision_level() <= level) {
            return;
        }
        for (size_t i = trail_.size(); i > trail_lim_[level]; --i) {
            const uint32_t v = var_of(trail_[i - 1]);
            phase_[v] = assigns_[v] == True;
            assigns_[v] = Undef;
            reason_[v] = no_reason;
            if (heap_index_[v] < 0) {
                heap_insert(v);
            }
        }
        trail_.resize(trail_lim_[level]);
        trail_lim_.resize(level);
        qhead_ = trail_.size();
    }

    SatStatus search(uint64_t conflict_limit, std::string& reason) {
        uint64_t conflicts_here = 0;
        std::vector<Lit> learnt;
        uint64_t ticks = 0;
        for (;;) {
            if ((++ticks & 255) == 0 && Clock::now() >= deadline_) {
                reason = "wall-time budget of " + std::to_string(budget_.max_wall_time) + " s exhausted";
                return SatStatus::Unknown;
            }
            const uint32_t conflict = propagate();
            if (conflict != no_reason) {
                ++stats_.conflicts;
                ++conflicts_here;
                if (decision_level() == 0) {
                    return SatStatus::Unsat;
                }
                const uint32_t back = analyze(conflict, learnt);
                backtrack(back);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], no_reason);
                } else {
                    const uint32_t cref = attach(Clause{.lits = learnt, .learnt = true});
                    bump_clause(clauses_[cref]);
                    ++stats_.learnts;
                    ++num_learnts_;
                    enqueue(learnt[0], cref);
                }
                var_inc_ /= var_decay;
                clause_inc_ /= clause_decay;
                if (stats_.conflicts >= budget_.max_conflicts) {
                    reason = "conflict budget of " + std::to_string(budget_.max_conflicts) + " exhausted";
                    return SatStatus::Unknown;
                }
                continue;
            }
            if (conflicts_here >= conflict_limit) {
                backtrack(0);
                return SatStatus::Unknown;
            }
            if (static_cast<double>(num_learnts_) > max_learnts_) {
                reduce_db();
            }
            const auto next = pick_branch();
            if (!next) {
                return SatStatus::Sat;
            }
            ++stats_.decisions;
            trail_lim_.push_back(static_cast<uint32_t>(trail_.size()));
            enqueue(make_lit(*next, !phase_[*next]), no_reason);
        }
    }

    std::optional<uint32_t> pick_branch() {
        while (!heap_.empty()) {
            const uint32_t v = heap_pop();
            if (assigns_[v] == Undef) {
                return v;
            }
        }
        return std::nullopt;
    }

    [[nodiscard]] bool locked(uint32_t cref) const {
        const Clause& c = clauses_[cref];
        const uint32_t v = var_of(c.lits[0]);
        return reason_[v] == cref && value(c.lits[0]) == True;
    }

    void reduce_db() {
        std::vector<uint32_t> learnts;
        for (uint32_t i = 0; i < clauses_.size(); ++i) {
            if (clauses_[i].learnt && !clauses_[i].deleted) {
                learnts.push_back(i);
            }
        }
        std::sort(learnts.begin(), learnts.end(), [&](uint32_t a, uint32_t b) {
            if (clauses_[a].activity != clauses_[b].activity) {
                return clauses_[a].activity < clauses_[b].activity;
            }
            return a < b;
        });
        for (size_t i = 0; i < learnts.size() / 2; ++i) {
            Clause& c = clauses_[learnts[i]];
            if (c.lits.size() > 2 && !locked(learnts[i])) {
                c.deleted = true;
                c.lits.shrink_to_fit();
                --num_learnts_;
            }
        }
        for (auto& ws : watches_) {
            std::erase_if(ws, [&](const Watch& w) { return clauses_[w.cref].deleted; });
        }
    }

    void bump_var(uint32_t v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (auto& a : activity_) {
                a *= 1e-100;
            }
            var_inc_ *= 1e-100;
        }
        if (heap_index_[v] >= 0) {
            sift_up(static_cast<size_t>(heap_index_[v]));
        }
    }

    void bump_clause(Clause& c) {
        c.activity += clause_inc_;
        if (c.activity > 1e20) {
            for (auto& cl : clauses_) {
                if (cl.learnt) {
                    cl.activity *= 1e-20;
                }
            }
            clause_inc_ *= 1e-20;
        }
    }

    // Binary max-heap on (activity, -index).
    [[nodiscard]] bool before(uint32_t a, uint32_t b) const {
        return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
    }

    void heap_insert(uint32_t v) {
        heap_index_[v] = static_cast<int32_t>(heap_.size());
        heap_.push_back(v);
        sift_up(heap_.size() - 1);
    }

    uint32_t heap_pop() {
        const uint32_t top = heap_[0];
        heap_index_[top] = -1;
        const uint32_t last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            heap_index_[last] = 0;
            sift_down(0);
        }
        return top;
    }

    void sift_up(size_t i) {
        const uint32_t v = heap_[i];
        while (i > 0) {
            const size_t parent = (i - 1) / 2;
            if (!before(v, heap_[parent])) {
                break;
            }
            heap_[i] = heap_[parent];
            heap_index_[heap_[i]] = static_cast<int32_t>(i);
            i = parent;
        }
        heap_[i] = v;
        heap_index_[v] = static_cast<int32_t>(i);
    }

    void sift_down(size_t i) {
        const uint32_t v = heap_[i];
        for (;;) {
            size_t child = 2 * i + 1;
            if (child >= heap_.size()) {
                break;
            }
            if (child + 1 < heap_.size() && before(heap_[child + 1], heap_[child])) {
                ++child;
            }
            if (!before(heap_[child], v)) {
                break;
            }
            heap_[i] = heap_[child];
            heap_index_[heap_[i]] = static_cast<int32_t>(i);
            i = child;
        }
        heap_[i] = v;
        heap_index_[v] = static_cast<int32_t>(i);
    }

    static constexpr double var_decay = 0.95;
    static constexpr double clause_decay = 0.999;

    SolveBudget budget_;
    Clock::time_point deadline_;
    uint32_t nvars_;
    bool ok_ = true;

    std::vector<Clause> clauses_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<Value> assigns_;
    std::vector<uint32_t> level_;
    std::vector<uint32_t> reason_;
    std::vector<Lit> trail_;
    std::vector<uint32_t> trail_lim_;
    size_t qhead_ = 0;

    std::vector<double> activity_;
    std::vector<bool> phase_;
    std::vector<uint8_t> seen_;
    std::vector<Lit> to_clear_;
    std::vector<uint32_t> heap_;
    std::vector<int32_t> heap_index_;
    double var_inc_ = 1.0;
    double clause_inc_ = 1.0;
    double max_learnts_ = 1000;
    uint64_t num_learnts_ = 0;

    SatStats stats_;
};

} // namespace

SatResult sat_solve(const Cnf& cnf, const SolveBudget& budget, uint64_t seed) {
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(budget.max_wall_time));
    return sat_solve(cnf, budget, seed, deadline);
}

SatResult sat_solve(const Cnf& cnf, const SolveBudget& budget, uint64_t seed, Clock::time_point deadline) {
    if (budget.max_conflicts == 0 || !(budget.max_wall_time > 0)) {
        throw std::invalid_argument("solve budget must be positive");
    }
    Cdcl solver(cnf, budget, seed, deadline);
    return solver.run();
}

} // namespace bvscan::sat
