#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rhjb/runner.hpp"

// Command-line front end: reads a problem configuration document, runs one
// command (audits, solves, oracle runs, verification sweeps) and writes
// deterministic artifacts into the output directory.
int main(int argc, char** argv) {
    CLI::App app{"rhjb - two-domain optimal control solver and verification suite"};

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string command;

    app.add_option("--config", config_path, "problem configuration document")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed for sampled audits (overrides [run] seed)");
    app.add_option("--threads", threads, "worker threads for node updates");
    app.add_option("--command", command, "command to run (overrides [run] command)");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read config file " << config_path << "\n";
            return rhjb::kExitConfigError;
        }
        std::ostringstream text;
        text << in.rdbuf();

        rhjb::RunConfig rc;
        rc.config = rhjb::Config::parse(text.str(), config_path);
        rc.out_dir = out_dir;
        rc.seed = seed;
        rc.threads = threads;
        rc.command = command;
        return rhjb::run(rc);
    } catch (const rhjb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return rhjb::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rhjb::kExitCheckFailed;
    }
}
