// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/policy.hpp"

#include <algorithm>
#include <cctype>

namespace bvscan::policy {

Decision evaluate(const ActionRecord& a, const PolicyConfig& p) {
    const bool checks[] = {
        a.target_class != TargetClass::ExternalNetwork,
        a.action_type != ActionType::SendEmail,
        a.action_type != ActionType::WritePublicEndpoint,
        std::includes(p.authorized_scope.begin(), p.authorized_scope.end(), a.scope.begin(), a.scope.end()),
        p.approved_manifest.count(a.content_hash) != 0,
        a.session_state == SessionState::Supervised,
    };
    Decision d;
    for (size_t i = 0; i < std::size(checks); ++i) {
        if (!checks[i]) {
            d.failed.push_back("C" + std::to_string(i + 1));
        }
    }
    d.verdict = d.failed.empty() ? Verdict::Safe : Verdict::Unsafe;
    return d;
}

const char* verdict_name(Verdict v) { return v == Verdict::Safe ? "Safe" : "Unsafe"; }

std::string action_type_name(const ActionRecord& a) {
    switch (a.action_type) {
    case ActionType::SendEmail: return "SendEmail";
    case ActionType::WritePublicEndpoint: return "WritePublicEndpoint";
    case ActionType::FileWrite: return "FileWrite";
    case ActionType::NetworkConnect: return "NetworkConnect";
    case ActionType::Other: return a.other_name.empty() ? "Other" : a.other_name;
    }
    return "Other";
}

ActionRecord parse_action(const kv::Record& r) {
    ActionRecord a;
    a.id = r.find("id").value_or("");
    const std::string type = r.get("action_type");
    if (type == "SendEmail") {
        a.action_type = ActionType::SendEmail;
    } else if (type == "WritePublicEndpoint") {
        a.action_type = ActionType::WritePublicEndpoint;
    } else if (type == "FileWrite") {
        a.action_type = ActionType::FileWrite;
    } else if (type == "NetworkConnect") {
        a.action_type = ActionType::NetworkConnect;
    } else {
        a.action_type = ActionType::Other;
        a.other_name = type;
    }
    const std::string target = r.get("target_class");
    if (target == "ExternalNetwork") {
        a.target_class = TargetClass::ExternalNetwork;
    } else if (target == "InternalNetwork") {
        a.target_class = TargetClass::InternalNetwork;
    } else if (target == "Local") {
        a.target_class = TargetClass::Local;
    } else {
        throw r.error("unknown target_class '" + target + "'");
    }
    for (auto& s : kv::split_list(r.get("scope"))) {
        a.scope.insert(std::move(s));
    }
    a.content_hash = r.get("content_hash");
    const std::string session = r.get("session_state");
    if (session == "Supervised") {
        a.session_state = SessionState::Supervised;
    } else if (session == "Unsupervised") {
        a.session_state = SessionState::Unsupervised;
    } else {
        throw r.error("unknown session_state '" + session + "'");
    }
    return a;
}

namespace {

bool well_formed_digest(const std::string& d) {
    return !d.empty() && std::all_of(d.begin(), d.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == ':' || c == '.' || c == '_' || c == '-';
    });
}

} // namespace

PolicyConfig parse_config(const std::vector<kv::Record>& records) {
    PolicyConfig p;
    for (const auto& r : records) {
        for (const auto& [key, value] : r.fields) {
            if (key == "authorized_scope") {
                for (auto& s : kv::split_list(value)) {
                    p.authorized_scope.insert(std::move(s));
                }
            } else if (key == "approved_manifest") {
                for (auto& d : kv::split_list(value)) {
                    if (!well_formed_digest(d)) {
                        throw r.error("malformed digest '" + d + "' in approved_manifest");
                    }
                    p.approved_manifest.insert(std::move(d));
                }
            } else if (key != "type") {
                throw r.error("unknown policy field '" + key + "'");
            }
        }
    }
    return p;
}

std::string log_line(const ActionRecord& a, const Decision& d, const std::string& timestamp) {
    std::string failed;
    for (const auto& c : d.failed) {
        failed += (failed.empty() ? "" : ",") + c;
    }
    std::vector<std::pair<std::string, std::string>> fields{{"timestamp", timestamp}};
    if (!a.id.empty()) {
        fields.emplace_back("action", a.id);
    }
    fields.emplace_back("action_type", action_type_name(a));
    fields.emplace_back("verdict", verdict_name(d.verdict));
    fields.emplace_back("failed", failed);
    fields.emplace_back("threat", d.threat_tag);
    return kv::format(fields);
}

} // namespace bvscan::policy
