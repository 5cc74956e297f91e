// rlc: batch compiler, borrow checker, interpreter and C emitter for the
// Rustlight language.
//
//   rlc check  prog.rl [--dump=...] [--emit-loans loans.json]
//   rlc build  prog.rl -o prog.c [--cc gcc]
//   rlc run    prog.rl [--entry main] [--trace] [--fuel N]
//
// Exit codes: 0 success, 1 diagnostics reported, 2 usage or internal
// error. `run` exits with the interpreted program's exit code (101 on a
// runtime trap), mirroring what the emitted C binary would do.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rustlight/driver.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << text;
    return bool(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rustlight compiler and verifying borrow checker"};
    app.require_subcommand(1);

    std::string file;
    std::string dump;
    std::string diag_fmt = "text";
    std::string loans_path;
    std::string out_path = "out.c";
    std::string cc;
    std::string entry = "main";
    bool field_insensitive = false;
    bool pre_elab = false;
    bool trace = false;
    uint64_t fuel = 100'000'000;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", file, "Rustlight source file")->required();
        sub->add_option("--dump", dump, "print an intermediate form")
            ->check(CLI::IsMember({"rustir", "rustir-elab", "dataflow:init",
                                   "dataflow:live", "dataflow:borrow"}));
        sub->add_option("--emit-loans", loans_path,
                        "write the per-node loan/region report as JSON");
        sub->add_flag("--borrow-field-insensitive", field_insensitive,
                      "treat places with the same base local as overlapping");
        sub->add_flag("--borrow-pre-elab", pre_elab,
                      "borrow-check the IR before drop elaboration");
        sub->add_option("--diagnostics", diag_fmt, "diagnostic format")
            ->check(CLI::IsMember({"text", "json"}));
    };

    CLI::App* cmd_check = app.add_subcommand("check", "report diagnostics only");
    add_common(cmd_check);

    CLI::App* cmd_build = app.add_subcommand("build", "emit C99");
    add_common(cmd_build);
    cmd_build->add_option("-o,--output", out_path, "output C file");
    cmd_build->add_option("--cc", cc, "also compile with this C compiler");
    cmd_build->add_option("--entry", entry, "entry function");

    CLI::App* cmd_run = app.add_subcommand("run", "interpret the program");
    add_common(cmd_run);
    cmd_run->add_option("--entry", entry, "entry function");
    cmd_run->add_option("--fuel", fuel, "interpreter step budget");
    cmd_run->add_flag("--trace", trace, "print execution events");

    CLI11_PARSE(app, argc, argv);

    std::string source;
    if (!read_file(file, source)) {
        std::cerr << "rlc: cannot read `" << file << "`\n";
        return 2;
    }

    rustlight::driver::Options opts;
    opts.dump = dump;
    opts.borrow_field_insensitive = field_insensitive;
    opts.borrow_pre_elab = pre_elab;

    auto comp = rustlight::driver::compile(file, std::move(source), opts);

    if (!comp.dump_text.empty()) std::cout << comp.dump_text;
    if (!comp.diags.empty())
        std::cerr << rustlight::driver::render_diagnostics(comp,
                                                           diag_fmt == "json");
    if (!comp.lowered) return comp.diags.empty() ? 2 : 1;

    if (!loans_path.empty()) {
        if (!write_file(loans_path, rustlight::driver::emit_loans_json(comp))) {
            std::cerr << "rlc: cannot write `" << loans_path << "`\n";
            return 2;
        }
    }
    if (!comp.diags.empty()) return 1;

    if (cmd_build->parsed()) {
        std::string c_text = rustlight::driver::emit_c(comp, entry);
        if (!write_file(out_path, c_text)) {
            std::cerr << "rlc: cannot write `" << out_path << "`\n";
            return 2;
        }
        if (!cc.empty()) {
            std::string exe = out_path;
            if (exe.size() > 2 && exe.substr(exe.size() - 2) == ".c")
                exe = exe.substr(0, exe.size() - 2);
            else
                exe += ".bin";
            std::string command =
                cc + " -std=c99 -O1 -o " + exe + " " + out_path;
            int rc = std::system(command.c_str());
            if (rc != 0) {
                std::cerr << "rlc: C compiler failed: " << command << "\n";
                return 2;
            }
        }
        return 0;
    }

    if (cmd_run->parsed()) {
        rustlight::interp::RunOptions ro;
        ro.entry = entry;
        ro.fuel = fuel;
        ro.trace = trace;
        auto res = rustlight::driver::run(comp, ro);
        for (const auto& line : res.trace) std::cout << line << "\n";
        if (!res.ok()) {
            std::cerr << "rlc: runtime trap: "
                      << rustlight::interp::trap_name(res.trap) << ": "
                      << res.message << "\n";
            return 101;
        }
        if (res.leaked != 0)
            std::cerr << "rlc: warning: " << res.leaked
                      << " heap cell(s) leaked\n";
        return res.exit_code & 0xff;
    }

    return 0;  // check
}
