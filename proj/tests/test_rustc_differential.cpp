#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rustlight/driver.hpp"

using namespace rustlight;
namespace fs = std::filesystem;

// Differential harness: every corpus program is also a Rust program.
// rustc is the ground truth for the ownership and borrow rules; the
// checker may only diverge in the conservative direction, and each such
// divergence must be declared in the file and documented in the ledger.
namespace {

struct CorpusFile {
    fs::path path;
    std::string source;
    std::string verdict;
    std::optional<std::string> rustc_verdict;
    std::vector<std::string> rustc_errs;  // expected E-codes, if declared
    std::optional<std::string> ledger;
};

std::optional<std::string> header_value(const std::string& src,
                                        const std::string& key) {
    std::istringstream is(src);
    std::string line;
    std::string prefix = "// " + key + ":";
    while (std::getline(is, line)) {
        if (line.rfind("//", 0) != 0) break;
        if (line.rfind(prefix, 0) == 0) {
            std::string v = line.substr(prefix.size());
            size_t b = v.find_first_not_of(" \t");
            return b == std::string::npos ? "" : v.substr(b);
        }
    }
    return std::nullopt;
}

std::vector<CorpusFile> load_corpus() {
    std::vector<CorpusFile> out;
    fs::path root = RUSTLIGHT_CORPUS_DIR;
    for (const char* cat : {"accept", "reject", "edge"}) {
        for (const auto& ent : fs::directory_iterator(root / cat)) {
            if (ent.path().extension() != ".rl") continue;
            CorpusFile f;
            f.path = ent.path();
            std::ifstream in(ent.path());
            std::stringstream ss;
            ss << in.rdbuf();
            f.source = ss.str();
            f.verdict = header_value(f.source, "verdict").value_or("");
            f.rustc_verdict = header_value(f.source, "rustc");
            f.ledger = header_value(f.source, "ledger");
            if (auto e = header_value(f.source, "rustc-err")) {
                std::istringstream es(*e);
                std::string tok;
                while (std::getline(es, tok, ',')) f.rustc_errs.push_back(tok);
            }
            out.push_back(std::move(f));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CorpusFile& a, const CorpusFile& b) {
                  return a.path < b.path;
              });
    return out;
}

bool rustc_available() {
    static int cached = -1;
    if (cached < 0) {
        std::string cmd = std::string(RUSTLIGHT_RUSTC_PATH) +
                          " --version > /dev/null 2>&1";
        int st = std::system(cmd.c_str());
        cached = (st != -1 && WIFEXITED(st) && WEXITSTATUS(st) == 0) ? 1 : 0;
    }
    return cached == 1;
}

struct RustcResult {
    bool accepted = false;
    std::string stderr_text;
};

// The corpus dialect is a strict Rust subset, but rustc would drown the
// signal in lint noise for tiny programs; silence the irrelevant lints.
const char* kPrologue =
    "#![allow(dead_code, unused_variables, unused_mut, unused_assignments, "
    "unused_parens)]\n";

RustcResult run_rustc(const CorpusFile& f) {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "rustlight_rustc_diff";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    fs::path rs = dir / (f.path.stem().string() + ".rs");
    fs::path log = dir / (f.path.stem().string() + ".log");
    {
        std::ofstream out(rs);
        out << kPrologue << f.source;
    }
    std::string cmd = std::string(RUSTLIGHT_RUSTC_PATH) +
                      " --edition 2021 --emit=metadata --out-dir " +
                      dir.string() + " " + rs.string() + " > /dev/null 2> " +
                      log.string();
    int st = std::system(cmd.c_str());
    RustcResult r;
    r.accepted = st != -1 && WIFEXITED(st) && WEXITSTATUS(st) == 0;
    std::ifstream lf(log);
    std::stringstream ss;
    ss << lf.rdbuf();
    r.stderr_text = ss.str();
    return r;
}

// The E-codes whose rejection is a hard soundness obligation: if rustc
// reports one of these, accepting the program would be unsound.
bool in_must_reject_family(const std::string& stderr_text) {
    for (const char* code : {"E0382", "E0499", "E0502", "E0505", "E0506",
                             "E0507", "E0515", "E0597", "E0716"})
        if (stderr_text.find(code) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("rustc agrees with every corpus verdict, modulo the ledger") {
    if (!rustc_available()) {
        MESSAGE("rustc not found at " RUSTLIGHT_RUSTC_PATH
                "; skipping the differential");
        return;
    }
    size_t checked = 0, divergences = 0;
    for (const auto& f : load_corpus()) {
        INFO(f.path.string());
        RustcResult rc = run_rustc(f);

        // What this corpus entry claims rustc does.
        std::string expected = f.rustc_verdict.value_or(f.verdict);
        CHECK(rc.accepted == (expected == "accept"));

        // Our own verdict, recomputed (not trusted from the header).
        driver::Compilation c =
            driver::compile(f.path.filename().string(), f.source, {});
        CHECK(c.ok() == (f.verdict == "accept"));

        // Soundness: a program rustc rejects for an ownership error must
        // be rejected here, no ledger entry can excuse it.
        if (!rc.accepted && in_must_reject_family(rc.stderr_text)) {
            CHECK(!c.ok());
        }

        // Conservative divergence bookkeeping.
        if (rc.accepted && !c.ok()) {
            ++divergences;
            CHECK(f.ledger.has_value());
        }
        CHECK(!(c.ok() && !rc.accepted));  // unsound direction, never allowed

        // Declared E-codes must actually appear.
        if (!rc.accepted)
            for (const auto& code : f.rustc_errs) {
                INFO("expected rustc error ", code);
                CHECK(rc.stderr_text.find(code) != std::string::npos);
            }
        ++checked;
    }
    CHECK(checked >= 40);
    CHECK(divergences <= 5);
    MESSAGE("differential over ", checked, " programs, ", divergences,
            " documented conservative divergences");
}

TEST_CASE("the must-reject family is actually exercised by the corpus") {
    if (!rustc_available()) return;
    std::set<std::string> seen;
    for (const auto& f : load_corpus()) {
        if (f.verdict != "reject") continue;
        for (const auto& e : f.rustc_errs) seen.insert(e);
    }
    // Breadth requirement: moves, conflicting borrows, assignment and
    // move while borrowed, move out of ref, and escaping references all
    // need at least one dedicated program.
    for (const char* code :
         {"E0382", "E0499", "E0502", "E0505", "E0506", "E0507", "E0515",
          "E0597"}) {
        INFO("family code ", code);
        CHECK(seen.count(code) == 1);
    }
}
