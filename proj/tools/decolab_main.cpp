// decolab CLI: run decoherence experiments from a JSON config and emit
// deterministic CSV datasets plus a manifest.
//
//   decolab <command> --config <file> [--out <dir>] [--strict] [--threads N]
//
// Exit codes: 0 all tasks ok, 2 partial completion, 1 config or usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <decolab/decolab.hpp>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw decolab::IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

unsigned thread_count(int flag_value) {
    if (flag_value > 0) return unsigned(flag_value);
    if (const char* env = std::getenv("DECOLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decolab: instantaneous and dynamical decoherence of open quantum systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool strict = false;
    int threads = 0;

    for (const auto& name : decolab::known_commands()) {
        CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' command");
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config output_dir)");
        sub->add_flag("--strict", strict, "treat any task failure as a hard error");
        sub->add_option("--threads", threads, "worker threads (or env DECOLAB_THREADS)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        decolab::RunConfig cfg = decolab::parse_config(read_file(config_path), command);
        if (!out_dir.empty()) {
            cfg.output_dir = out_dir;
            cfg.resolved["output_dir"] = out_dir;
        }
        const decolab::RunManifest man = decolab::run(cfg, thread_count(threads));
        for (const auto& task : man.tasks) {
            std::cout << task.name << ": " << task.status << "\n";
            for (const auto& f : task.outputs)
                std::cout << "  " << f.path << " (fnv1a64 " << f.hash << ")\n";
        }
        if (man.all_ok()) return 0;
        if (strict) {
            std::cerr << "strict mode: at least one task failed\n";
            return 1;
        }
        return 2;
    } catch (const decolab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
