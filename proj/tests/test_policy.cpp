// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <random>

#include "bvscan/kv.hpp"
#include "bvscan/policy.hpp"
#include "doctest.h"

using namespace bvscan;
using policy::ActionRecord;
using policy::ActionType;
using policy::SessionState;
using policy::TargetClass;

namespace {

const policy::PolicyConfig kConfig{
    .authorized_scope = {"repo.read", "repo.write", "tests.run"},
    .approved_manifest = {"sha256:aaaa", "sha256:bbbb"},
};

ActionRecord conforming() {
    return {.action_type = ActionType::FileWrite,
            .target_class = TargetClass::Local,
            .scope = {"repo.write"},
            .content_hash = "sha256:aaaa",
            .session_state = SessionState::Supervised};
}

using Failed = std::vector<std::string>;

} // namespace

TEST_CASE("unsupervised external email fails five of six constraints") {
    const ActionRecord email{.action_type = ActionType::SendEmail,
                             .target_class = TargetClass::ExternalNetwork,
                             .scope = {"repo.read", "net.smtp"},
                             .content_hash = "sha256:eeee",
                             .session_state = SessionState::Unsupervised};
    const auto d = policy::evaluate(email, kConfig);
    CHECK(d.verdict == policy::Verdict::Unsafe);
    CHECK(d.failed == Failed{"C1", "C2", "C4", "C5", "C6"});
    CHECK(d.threat_tag == "T2");
}

TEST_CASE("an unapproved digest alone is enough to block") {
    auto a = conforming();
    CHECK(policy::evaluate(a, kConfig).verdict == policy::Verdict::Safe);
    CHECK(policy::evaluate(a, kConfig).failed.empty());
    a.content_hash = "sha256:eeee";
    const auto d = policy::evaluate(a, kConfig);
    CHECK(d.verdict == policy::Verdict::Unsafe);
    CHECK(d.failed == Failed{"C5"});
}

TEST_CASE("public post violates the external target and public write constraints") {
    auto a = conforming();
    a.action_type = ActionType::WritePublicEndpoint;
    a.target_class = TargetClass::ExternalNetwork;
    CHECK(policy::evaluate(a, kConfig).failed == Failed{"C1", "C3"});
}

TEST_CASE("random actions: order, verdict rule and scope monotonicity") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> caps{"repo.read", "repo.write", "tests.run", "net.smtp", "admin"};
    for (int i = 0; i < 2000; ++i) {
        ActionRecord a{.action_type = static_cast<ActionType>(rng() % 5),
                       .target_class = static_cast<TargetClass>(rng() % 3),
                       .content_hash = rng() % 2 ? "sha256:aaaa" : "sha256:zzzz",
                       .session_state = static_cast<SessionState>(rng() % 2)};
        policy::PolicyConfig p;
        for (const auto& c : caps) {
            if (rng() % 2) {
                a.scope.insert(c);
            }
            if (rng() % 2) {
                p.authorized_scope.insert(c);
            }
        }
        p.approved_manifest = {"sha256:aaaa"};
        const auto d = policy::evaluate(a, p);
        CHECK(std::is_sorted(d.failed.begin(), d.failed.end()));
        CHECK((d.verdict == policy::Verdict::Unsafe) == !d.failed.empty());
        CHECK(policy::evaluate(a, p).failed == d.failed); // pure

        // dropping an authorized capability never makes an unsafe action safe
        if (!p.authorized_scope.empty() && d.verdict == policy::Verdict::Unsafe) {
            auto smaller = p;
            smaller.authorized_scope.erase(smaller.authorized_scope.begin());
            CHECK(policy::evaluate(a, smaller).verdict == policy::Verdict::Unsafe);
        }
    }
}

TEST_CASE("action and config records parse") {
    const auto records = kv::parse(
        "# one action\n"
        "id=x action_type=SendEmail target_class=ExternalNetwork scope=a,b content_hash=sha256:1 "
        "session_state=Unsupervised\n"
        "action_type=Upload target_class=Local scope=\"\" content_hash=d session_state=Supervised\n",
        "actions");
    REQUIRE(records.size() == 2);
    const auto a = policy::parse_action(records[0]);
    CHECK(a.id == "x");
    CHECK(a.action_type == ActionType::SendEmail);
    CHECK(a.scope == std::set<std::string>{"a", "b"});
    const auto other = policy::parse_action(records[1]);
    CHECK(other.action_type == ActionType::Other);
    CHECK(policy::action_type_name(other) == "Upload");
    CHECK(other.scope.empty());

    const auto cfg = policy::parse_config(kv::parse("authorized_scope=a,b\napproved_manifest=sha256:1,md5:2\n"));
    CHECK(cfg.authorized_scope.size() == 2);
    CHECK(cfg.approved_manifest.count("md5:2") == 1);

    CHECK_THROWS_AS(policy::parse_config(kv::parse("approved_manifest=\"bad digest\"\n")), kv::FormatError);
    CHECK_THROWS_AS(policy::parse_config(kv::parse("colour=blue\n")), kv::FormatError);
    CHECK_THROWS_AS(policy::parse_action(kv::parse("action_type=SendEmail target_class=Moon scope=a content_hash=1 "
                                                   "session_state=Supervised\n")[0]),
                    kv::FormatError);
    CHECK_THROWS_AS(policy::parse_action(kv::parse("action_type=SendEmail\n")[0]), kv::FormatError);
}

TEST_CASE("decision log lines parse back") {
    auto a = conforming();
    a.id = "act 1";
    const auto d = policy::evaluate(a, kConfig);
    const std::string line = policy::log_line(a, d, "2026-01-01T00:00:00Z");
    const auto back = kv::parse(line);
    REQUIRE(back.size() == 1);
    CHECK(back[0].get("action") == "act 1");
    CHECK(back[0].get("verdict") == "Safe");
    CHECK(back[0].get("failed").empty());
    CHECK(back[0].get("threat") == "T2");
}

TEST_CASE("kv format and parse round-trip") {
    const std::vector<std::pair<std::string, std::string>> fields{
        {"plain", "word"}, {"spaced", "two words"}, {"quoted", "say \"hi\""}, {"slash", "a\\b"}, {"empty", ""}};
    const auto back = kv::parse(kv::format(fields));
    REQUIRE(back.size() == 1);
    CHECK(back[0].fields == fields);
}

TEST_CASE("kv rejects malformed lines with their position") {
    CHECK_THROWS_AS(kv::parse("a=1 a=2\n"), kv::FormatError);
    CHECK_THROWS_AS(kv::parse("a=\"open\n"), kv::FormatError);
    CHECK_THROWS_AS(kv::parse("novalue\n"), kv::FormatError);
    try {
        kv::parse("ok=1\n\n# c\nbad\n", "f");
        FAIL("expected a format error");
    } catch (const kv::FormatError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).rfind("f:4:", 0) == 0);
    }
    const auto r = kv::parse("n=0x10 m=12 s=x\n");
    CHECK(r[0].get_uint("n") == 16);
    CHECK(r[0].get_uint("m") == 12);
    CHECK_THROWS_AS((void)r[0].get_uint("s"), kv::FormatError);
    CHECK(kv::split_list("a,,b,") == std::vector<std::string>{"a", "b"});
}
