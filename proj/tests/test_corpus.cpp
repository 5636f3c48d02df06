// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bvscan/corpus.hpp"
#include "doctest.h"

using namespace bvscan;
namespace fs = std::filesystem;

namespace {

const std::string kCorpus = BVSCAN_CORPUS_DIR;

// Copies one fixture into a scratch corpus and rewrites its manifest.
fs::path with_manifest(const std::string& fixture, const std::string& from, const std::string& to) {
    const fs::path root = fs::temp_directory_path() / "bvscan_test_corpus";
    fs::remove_all(root);
    fs::create_directories(root / fixture);
    fs::copy_file(kCorpus + "/" + fixture + "/source.c", root / fixture / "source.c");
    std::ifstream in(kCorpus + "/" + fixture + "/manifest");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    text.replace(at, from.size(), to);
    std::ofstream(root / fixture / "manifest") << text;
    return root;
}

} // namespace

TEST_CASE("full corpus regression passes") {
    const auto r = corpus::run_regression(kCorpus);
    INFO(r.diff());
    CHECK(r.passed());
    CHECK(r.fixtures.size() == 7);
    for (const auto& f : r.fixtures) {
        CHECK(f.matched == f.findings);
        CHECK(f.witnesses_checked > 0);
    }
}

TEST_CASE("the TLV witness from the disclosure validates") {
    const auto m = corpus::load_manifest(kCorpus + "/mosquitto_proxy_v2");
    bool seen = false;
    for (const auto& w : m.witnesses) {
        if (w.values == bv::Assignment{{"len", 1}, {"tlv_len", 5}}) {
            seen = true;
            CHECK(w.holds);
        }
    }
    CHECK(seen);
    CHECK(corpus::run_fixture(m).mismatches.empty());
}

TEST_CASE("a wrong verdict fails with a diff naming the fixture") {
    const auto root = with_manifest("alloc_size", "line=17 kind=MulOverflow verdict=unsat",
                                    "line=17 kind=MulOverflow verdict=sat");
    const auto r = corpus::run_regression(root.string());
    CHECK_FALSE(r.passed());
    REQUIRE(r.fixtures.size() == 1);
    REQUIRE(r.fixtures[0].mismatches.size() == 1);
    CHECK(r.fixtures[0].mismatches[0].what == "verdict");
    CHECK(r.diff().rfind("alloc_size: verdict: line 17 MulOverflow", 0) == 0);
}

TEST_CASE("missing and unexpected findings are both reported") {
    const auto root = with_manifest("openbsd_sack", "line=13 kind=SeqComparePair", "line=14 kind=SeqComparePair");
    const auto r = corpus::run_regression(root.string());
    std::set<std::string> kinds;
    for (const auto& m : r.fixtures.at(0).mismatches) {
        kinds.insert(m.what);
    }
    CHECK(kinds.count("missing") == 1);
    CHECK(kinds.count("unexpected") == 1);
}

TEST_CASE("a witness that does not hold is a mismatch") {
    const auto root = with_manifest("wolfssl_mldsa", "values=\"w1=2\" holds=true", "values=\"w1=1\" holds=true");
    const auto r = corpus::run_regression(root.string());
    REQUIRE_FALSE(r.passed());
    CHECK(r.fixtures.at(0).mismatches.at(0).what == "witness");
}

TEST_CASE("a fixture without a manifest fails") {
    const fs::path root = fs::temp_directory_path() / "bvscan_test_nomanifest";
    fs::remove_all(root);
    fs::create_directories(root / "lonely");
    std::ofstream(root / "lonely" / "source.c") << "int f(int x) { return x; }\n";
    const auto r = corpus::run_regression(root.string());
    CHECK_FALSE(r.passed());
    CHECK(r.fixtures.at(0).mismatches.at(0).what == "error");
}
