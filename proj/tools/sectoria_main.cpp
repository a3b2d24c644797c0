// sectoria CLI: thin front end over the C API.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sectoria.h"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string spec_path;
    std::string out_dir = ".";
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--spec", args.spec_path, "job spec JSON file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override");
}

int write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        std::cerr << "cannot write " << path << "\n";
        return 1;
    }
    os << content;
    return 0;
}

int run_command(const std::string& command, const CommonArgs& args) {
    std::ifstream is(args.spec_path, std::ios::binary);
    if (!is) {
        std::cerr << "cannot read spec file: " << args.spec_path << "\n";
        return 1;
    }
    std::ostringstream buf;
    buf << is.rdbuf();

    sectoria_job* job = nullptr;
    sectoria_status st = sectoria_job_create(buf.str().c_str(), &job);
    if (st != SECTORIA_OK) {
        std::cerr << "spec error: " << sectoria_last_error() << "\n";
        return st == SECTORIA_E_PARSE ? 1 : static_cast<int>(st);
    }
    if (args.seed >= 0) sectoria_job_set_seed(job, static_cast<unsigned long long>(args.seed));

    char* result = nullptr;
    st = sectoria_job_run(job, command.c_str(), &result);
    int rc = static_cast<int>(st);
    if (!result) {
        std::cerr << command << " failed: " << sectoria_last_error() << "\n";
        sectoria_job_destroy(job);
        return rc == 0 ? 4 : rc;
    }

    fs::create_directories(args.out_dir);
    fs::path out = fs::path(args.out_dir) / (command + ".json");
    if (write_file(out, result)) rc = std::max(rc, 1);
    std::cout << out.string() << "\n";
    sectoria_string_free(result);

    for (const char* name : {"samples.csv", "pieces.csv"}) {
        char* csv = nullptr;
        if (sectoria_job_artifact(job, name, &csv) == SECTORIA_OK) {
            fs::path p = fs::path(args.out_dir) / name;
            if (write_file(p, csv)) rc = std::max(rc, 1);
            std::cout << p.string() << "\n";
            sectoria_string_free(csv);
        }
    }
    if (rc != 0 && *sectoria_last_error())
        std::cerr << command << ": " << sectoria_last_error() << "\n";
    sectoria_job_destroy(job);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sectoria: tempered solutions of linear ODE systems at an irregular "
                 "singular point"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sectoria_version()));

    const char* commands[] = {"analyze", "cover", "solve", "check-pullback", "experiment"};
    const char* descs[] = {"exponential parts and fundamental-solution data",
                           "covering of a band germ by sector/chart-image pieces",
                           "cover, solve every piece, and report",
                           "pullback temperedness equivalence check",
                           "H1 comparison experiment over RHS trials"};
    CommonArgs args[5];
    for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(commands[i], descs[i]), args[i]);

    CLI11_PARSE(app, argc, argv);

    for (int i = 0; i < 5; ++i)
        if (app.get_subcommand(commands[i])->parsed()) return run_command(commands[i], args[i]);
    return 1;
}
