// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Six boolean constraints over an agent action; any failure makes the action
// unsafe.
//
//   C1 target is not on an external network
//   C2 action does not send email
//   C3 action does not write to a public endpoint
//   C4 requested scope is within the authorized scope
//   C5 content digest is in the approved manifest
//   C6 session is supervised

#include <set>
#include <string>
#include <vector>

#include "bvscan/kv.hpp"

namespace bvscan::policy {

enum class ActionType { SendEmail, WritePublicEndpoint, FileWrite, NetworkConnect, Other };
enum class TargetClass { ExternalNetwork, InternalNetwork, Local };
enum class SessionState { Supervised, Unsupervised };

struct ActionRecord {
    std::string id; // label for logs, optional
    ActionType action_type = ActionType::Other;
    std::string other_name; // spelling of an Other action
    TargetClass target_class = TargetClass::Local;
    std::set<std::string> scope;
    std::string content_hash;
    SessionState session_state = SessionState::Supervised;
};

struct PolicyConfig {
    std::set<std::string> authorized_scope;
    std::set<std::string> approved_manifest;
};

enum class Verdict { Safe, Unsafe };

struct Decision {
    Verdict verdict = Verdict::Safe;
    std::vector<std::string> failed; // subsequence of C1..C6
    std::string threat_tag = "T2";
};

/// Evaluates every constraint, so `failed` lists all violations in order.
Decision evaluate(const ActionRecord& a, const PolicyConfig& p);

const char* verdict_name(Verdict v);
std::string action_type_name(const ActionRecord& a);

/// Fields: action_type, target_class, scope (comma list), content_hash,
/// session_state, and an optional id. Unknown action types become Other.
ActionRecord parse_action(const kv::Record& r);

/// Merges authorized_scope and approved_manifest lists from all records.
/// Digests must be non-empty words of [A-Za-z0-9:._-].
PolicyConfig parse_config(const std::vector<kv::Record>& records);

/// One decision-log line: timestamp, action, verdict, failed list, threat tag.
std::string log_line(const ActionRecord& a, const Decision& d, const std::string& timestamp);

} // namespace bvscan::policy
