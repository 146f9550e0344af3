#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnmimo/bnmimo.h"

namespace {

int exit_code(bnm_status s) {
    switch (s) {
    case BNM_OK: return 0;
    case BNM_ERR_VALIDATION:
    case BNM_ERR_IO: return 1;
    case BNM_ERR_NUMERICAL:
    case BNM_ERR_INTERNAL: return 2;
    case BNM_ERR_SELFTEST: return 3;
    }
    return 2;
}

struct Failure {
    bnm_status status;
};

void check(bnm_status s) {
    if (s != BNM_OK) throw Failure{s};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    bnm_string_free(s);
    return out;
}

using RunPtr = std::unique_ptr<bnm_run, decltype(&bnm_run_destroy)>;

// Flags shared by every run subcommand. Only flags that were actually given
// are applied, so they override presets and config files.
struct RunFlags {
    std::string preset;
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string format;
    std::string kind;
    bool quiet = false;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::vector<std::pair<std::string, CLI::Option*>> switches;

    void add_value(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        options.emplace_back(key, app->add_option(flag, values[key], help));
    }
    void add_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        switches.emplace_back(key, app->add_flag(flag, help));
    }

    void attach(CLI::App* app, bool with_preset) {
        if (with_preset) app->add_option("--preset", preset, "Start from a named preset (see `figure --list`)");
        app->add_option("--config", config, "key=value file, or a CSV/JSON output to re-run");
        app->add_option("--set", sets, "Extra key=value assignment (repeatable, applied last)");
        app->add_option("--out", out, "Write results to this path plus one file per curve");
        app->add_option("--format", format, "Output format (default: from the --out extension, else csv)")->check(CLI::IsMember({"csv", "json"}));
        app->add_flag("-q,--quiet", quiet, "Do not print the summary table");
        add_value(app, "--nt", "nt", "Transmit antennas");
        add_value(app, "--nr", "nr", "Receive antennas");
        add_value(app, "--schemes", "schemes", "Capacity schemes, e.g. eq,wf,bf,bn,mdbf2,mdbn2");
        add_value(app, "--systems", "systems", "BER systems, e.g. bf,bn,bn/ml,bn+ldc,mdbn2+stbc");
        add_value(app, "--rate", "rate", "Data rate in bits per channel use");
        add_value(app, "--constellation", "constellation", "Explicit constellation (bpsk, qpsk, 8psk, 16qam, ...)");
        add_value(app, "--start", "snr_start_db", "First SNR point in dB");
        add_value(app, "--stop", "snr_stop_db", "Last SNR point in dB");
        add_value(app, "--step", "snr_step_db", "SNR step in dB");
        add_value(app, "--trials", "trials", "Channel draws (capacity and analytic BER)");
        add_value(app, "--min-errors", "min_errors", "BER: stop a point after this many bit errors");
        add_value(app, "--max-bits", "max_bits", "BER: bit budget per point");
        add_value(app, "--blocks-per-trial", "blocks_per_trial", "BER: code blocks sent per channel draw");
        add_value(app, "--batch-trials", "batch_trials", "Trials per work batch (0 = default)");
        add_value(app, "--seed", "seed", "Master seed");
        add_value(app, "--workers", "workers", "Worker threads");
        add_switch(app, "--analytic", "analytic", "BER: also compute the channel-averaged closed form");
        add_switch(app, "--independent-streams", "independent_streams", "Separate random streams per scheme");
    }

    void apply(bnm_run* run, const std::string& forced_kind, bool compare) const {
        if (!preset.empty()) check(bnm_run_apply_preset(run, preset.c_str()));
        if (!config.empty()) check(bnm_run_load_config(run, config.c_str()));
        if (!forced_kind.empty()) check(bnm_run_set(run, "kind", forced_kind.c_str()));
        if (compare) check(bnm_run_set(run, "compare", "true"));
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) check(bnm_run_set(run, key.c_str(), values.at(key).c_str()));
        for (const auto& [key, opt] : switches)
            if (opt->count() > 0) check(bnm_run_set(run, key.c_str(), "true"));
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", s.c_str());
                throw Failure{BNM_ERR_VALIDATION};
            }
            check(bnm_run_set(run, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
        }
    }
};

int execute_run(const RunFlags& flags, const std::string& forced_kind, bool compare) {
    bnm_run* raw = nullptr;
    check(bnm_run_create(&raw));
    RunPtr run(raw, &bnm_run_destroy);
    flags.apply(run.get(), forced_kind, compare);
    check(bnm_run_validate(run.get()));
    check(bnm_run_execute(run.get()));
    if (!flags.out.empty()) {
        std::string format = flags.format;
        if (format.empty()) {
            const auto& o = flags.out;
            format = o.size() > 5 && o.compare(o.size() - 5, 5, ".json") == 0 ? "json" : "csv";
        }
        char* written = nullptr;
        check(bnm_run_write(run.get(), flags.out.c_str(), format.c_str(), &written));
        std::cerr << take(written);
    }
    if (!flags.quiet) {
        char* text = nullptr;
        check(bnm_run_summary(run.get(), &text));
        std::cout << take(text);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO beamforming / beam-nulling link and capacity simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bnm_version()));

    RunFlags cap_flags, ber_flags, fig_flags, cmp_flags;

    auto* cap = app.add_subcommand("capacity", "Ergodic capacity curves");
    cap_flags.attach(cap, true);

    auto* ber = app.add_subcommand("ber", "Simulated bit error rate curves");
    ber_flags.attach(ber, true);

    auto* fig = app.add_subcommand("figure", "Run a named preset");
    std::string fig_name;
    bool fig_list = false;
    fig->add_option("name", fig_name, "Preset name");
    fig->add_flag("--list", fig_list, "List presets");
    fig->add_flag("--compare", "Add crossover and best-region analysis");
    fig_flags.attach(fig, false);

    auto* cmp = app.add_subcommand("compare", "Capacity or BER curves with crossovers and best regions");
    cmp->add_option("--kind", cmp_flags.kind, "capacity or ber (default: from preset/config)")
        ->check(CLI::IsMember({"capacity", "ber"}));
    cmp_flags.attach(cmp, true);

    auto* st = app.add_subcommand("selftest", "Check numerical invariants on random instances");
    std::uint64_t st_seed = 1;
    std::size_t st_instances = 2000;
    bool st_fault = false;
    st->add_option("--seed", st_seed, "Seed for the random instances");
    st->add_option("--instances", st_instances, "Instances per property")->check(CLI::PositiveNumber);
    st->add_flag("--inject-fault", st_fault, "Corrupt the subspace construction (negative control)");

    auto* ldc = app.add_subcommand("export-ldc", "Print the dispersion matrices of the built-in LDC as JSON");
    int ldc_streams = 3;
    int ldc_t = 0;
    std::string ldc_out;
    ldc->add_option("--streams", ldc_streams, "Virtual transmit antennas");
    ldc->add_option("--block-length", ldc_t, "Channel uses per block (default: streams)");
    ldc->add_option("--out", ldc_out, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (cap->parsed()) return execute_run(cap_flags, "capacity", false);
        if (ber->parsed()) return execute_run(ber_flags, "ber", false);
        if (cmp->parsed()) return execute_run(cmp_flags, cmp_flags.kind, true);
        if (fig->parsed()) {
            if (fig_list || fig_name.empty()) {
                char* list = nullptr;
                check(bnm_preset_list(&list));
                std::cout << take(list);
                return fig_list ? 0 : 1;
            }
            fig_flags.preset = fig_name;
            return execute_run(fig_flags, "", fig->count("--compare") > 0);
        }
        if (st->parsed()) {
            char* report = nullptr;
            const bnm_status s = bnm_selftest(st_seed, st_instances, st_fault ? 1 : 0, &report);
            std::cout << take(report);
            if (s != BNM_OK && s != BNM_ERR_SELFTEST) throw Failure{s};
            if (s == BNM_ERR_SELFTEST) std::cerr << "error: " << bnm_last_error() << "\n";
            return exit_code(s);
        }
        if (ldc->parsed()) {
            char* json = nullptr;
            check(bnm_ldc_export_json(ldc_streams, ldc_t > 0 ? ldc_t : ldc_streams, &json));
            const std::string text = take(json);
            if (ldc_out.empty()) {
                std::cout << text;
                return 0;
            }
            std::FILE* f = std::fopen(ldc_out.c_str(), "wb");
            if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size() || std::fclose(f) != 0) {
                std::cerr << "error: cannot write '" << ldc_out << "'\n";
                return 1;
            }
            return 0;
        }
    } catch (const Failure& f) {
        if (*bnm_last_error()) std::cerr << "error: " << bnm_last_error() << "\n";
        return exit_code(f.status);
    }
    return 1;
}
