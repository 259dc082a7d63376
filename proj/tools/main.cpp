#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinso4/report.hpp"
#include "spinso4/suites.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = "out";
    std::string format = "json";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "flat key=value config file");
    cmd->add_option("--set", o.sets, "override, repeatable: --set key=value");
    cmd->add_option("--seed", o.seed, "master seed")->each([&o](const std::string&) {
        o.seed_given = true;
    });
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
}

spinso4::report::RunConfig load_config(const CommonOpts& o) {
    spinso4::report::RunConfig cfg;
    if (!o.config_path.empty())
        cfg = spinso4::report::RunConfig::from_file(o.config_path);
    for (const auto& s : o.sets) cfg.set_pair(s);
    if (o.seed_given) cfg.kv["seed"] = std::to_string(o.seed);
    return cfg;
}

int finish(const spinso4::report::Report& rep, const CommonOpts& o,
           const std::string& stem) {
    const std::string path = spinso4::report::emit(rep, o.out_dir, o.format, stem);
    std::cout << rep.to_text();
    std::cout << "report written to " << path << "\n";
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-symmetric Coulomb problem verification workbench"};
    app.require_subcommand(1);

    CommonOpts run_opts, ladder_opts, emit_opts;
    std::string emit_input;

    CLI::App* run_cmd = app.add_subcommand("run", "execute verification suites");
    add_common(run_cmd, run_opts);

    CLI::App* ladder_cmd =
        app.add_subcommand("ladder", "operator-algebra grid convergence study");
    add_common(ladder_cmd, ladder_opts);

    CLI::App* emit_cmd =
        app.add_subcommand("emit", "re-render an existing JSON report");
    emit_cmd->add_option("report", emit_input, "input report (JSON)")->required();
    emit_cmd->add_option("--out", emit_opts.out_dir, "output directory");
    emit_cmd->add_option("--format", emit_opts.format, "json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed())
            return finish(spinso4::suites::run(load_config(run_opts)), run_opts,
                          "report");
        if (ladder_cmd->parsed())
            return finish(spinso4::suites::run_ladder(load_config(ladder_opts)),
                          ladder_opts, "ladder");
        if (emit_cmd->parsed()) {
            std::ifstream in(emit_input, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open " + emit_input);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto rep = spinso4::report::Report::from_json(ss.str());
            const std::string path = spinso4::report::emit(
                rep, emit_opts.out_dir, emit_opts.format, "report");
            std::cout << "report written to " << path << "\n";
            return rep.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
