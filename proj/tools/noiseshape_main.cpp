// Command-line front end. Everything substantive happens behind the C API in
// libnoiseshape; this file only maps flags onto config keys and prints the
// resulting report. Exit codes: 0 success, 1 failed check, 2 usage, 3 numeric.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noiseshape.h"

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

// Every value flag is declared as a string and forwarded verbatim to the
// config store, which owns parsing and validation.
const std::vector<FlagSpec> kCommonFlags = {
    {"--out", "out", "output base directory (default runs)"},
    {"--seed", "seed", "master seed (default 12345)"},
};

const std::vector<FlagSpec> kTrainFlags = {
    {"--epochs", "train.epochs", "training epochs (default 2000)"},
    {"--lr", "train.lr", "Adam learning rate (default 3e-4)"},
    {"--weight-decay", "train.weight_decay", "decoupled weight decay (default 0)"},
    {"--batch-size", "train.batch_size", "minibatch size, 0 = full batch"},
    {"--overfit-threshold", "train.overfit_threshold",
     "memorization target mse (default 1e-3)"},
    {"--n-pairs", "toy.n_pairs", "training pairs per dataset (default 16)"},
    {"--grid-size", "toy.grid_size", "interior time-grid points (default 3)"},
    {"--width", "net.width", "hidden width (default 128)"},
    {"--rff-features", "net.rff_features", "Fourier features (default 128)"},
    {"--rff-scale", "net.rff_scale", "Fourier frequency scale (default 3)"},
    {"--emb-dim", "net.emb_dim", "seed embedding dimension (default 16)"},
    {"--n-blocks", "net.n_blocks", "FiLM blocks (default 3)"},
    {"--direction", "direction", "flow sign in the sampler, 1 or -1 (default 1)"},
};

const std::vector<FlagSpec> kModelFlags = {
    {"--ckpt", "ckpt", "checkpoint path (required)"},
    {"--shape", "shape", "target shape name (default first in recipe)"},
    {"--emb", "emb", "seed-bank position for the embedding (default 0)"},
    {"--points", "points", "points per sample (default 256)"},
    {"--steps", "steps", "Heun steps (default 40)"},
};

const std::vector<FlagSpec> kInjectFlags = {
    {"--k", "k", "aggregation timesteps (default 10)"},
    {"--delta", "delta", "injection strength (default 0.5)"},
    {"--center", "center", "weight-schedule vertex in flow time (default 0)"},
};

const std::vector<FlagSpec> kEraseFlags = {
    {"--n", "n", "noise sources to average (default 10)"},
    {"--points", "points", "rows per tensor (default 256)"},
    {"--dim", "dim", "columns per tensor (default 2)"},
};

const std::vector<FlagSpec> kPipelineFlags = {
    {"--n-erase", "n_erase", "sources for the erasure stage (default 10)"},
};

const std::vector<FlagSpec> kVerifyFlags = {
    {"--check", "check", "run one block: nln tpw claim1 snr timeshift heun cost"},
};

const std::vector<FlagSpec> kSweepFlags = {
    {"--repeats", "repeats", "repeats per cell (default 20)"},
    {"--n-erase-list", "sweep.n_erase", "comma list of n_erase cells"},
    {"--delta-list", "sweep.delta", "comma list of delta cells"},
    {"--center-list", "sweep.center", "comma list of center cells"},
    {"--n-erase", "n_erase", "base n_erase when no list given"},
};

struct Cli {
    std::string config_file;
    std::vector<std::string> overrides;  // raw key=value pairs from --set
    std::vector<std::pair<std::string, std::string>> values;  // key, value
};

void add_flags(CLI::App* cmd, Cli& cli, const std::vector<FlagSpec>& specs) {
    for (const FlagSpec& spec : specs) {
        const std::string key = spec.key;
        cmd->add_option_function<std::string>(
               spec.flag,
               [&cli, key](const std::string& v) { cli.values.emplace_back(key, v); },
               spec.help)
            ->expected(1);
    }
}

int fail(const char* stage) {
    std::fprintf(stderr, "noiseshape: %s: %s\n", stage, nsh_last_error());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise erasure and injection toolkit"};
    app.require_subcommand(1);

    Cli cli;
    struct CmdSpec {
        const char* name;
        const char* help;
        std::vector<const std::vector<FlagSpec>*> groups;
    };
    const std::vector<CmdSpec> cmds = {
        {"train", "fit the toy velocity model", {&kTrainFlags}},
        {"sample", "integrate points from seeded noise", {&kModelFlags}},
        {"erase", "average seeded noise tensors (no model)", {&kEraseFlags}},
        {"inject", "adjust a single noise with the model's own prediction, then sample",
         {&kModelFlags, &kInjectFlags}},
        {"pipeline", "erase + aggregate + blend + sample",
         {&kModelFlags, &kInjectFlags, &kPipelineFlags}},
        {"verify", "run the analytic verification suite", {&kVerifyFlags}},
        {"sweep", "grid over n_erase/delta/center",
         {&kModelFlags, &kInjectFlags, &kSweepFlags}},
    };

    for (const CmdSpec& spec : cmds) {
        CLI::App* cmd = app.add_subcommand(spec.name, spec.help);
        cmd->add_option("--config", cli.config_file, "config file of key = value lines");
        cmd->add_option("--set", cli.overrides, "extra key=value overrides")
            ->expected(-1);
        add_flags(cmd, cli, kCommonFlags);
        for (const auto* group : spec.groups) add_flags(cmd, cli, *group);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // help exits 0, every parse problem is usage
    }

    const std::string command = app.get_subcommands().front()->get_name();

    nsh_config* cfg = nsh_config_new();
    if (!cfg) {
        std::fprintf(stderr, "noiseshape: out of memory\n");
        return 3;
    }

    int rc = 0;
    // precedence: config file < --set pairs < named flags
    if (!cli.config_file.empty() && nsh_config_load_file(cfg, cli.config_file.c_str()))
        rc = fail("config");
    for (const std::string& kv : cli.overrides) {
        if (rc) break;
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "noiseshape: --set needs key=value, got '%s'\n",
                         kv.c_str());
            rc = 2;
            break;
        }
        if (nsh_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()))
            rc = fail("config");
    }
    for (const auto& [key, value] : cli.values) {
        if (rc) break;
        if (nsh_config_set(cfg, key.c_str(), value.c_str())) rc = fail("config");
    }

    if (!rc) {
        rc = (int)nsh_run(cfg, command.c_str());
        const char* report = nsh_last_report();
        if (report && *report) std::fputs(report, stdout);
        if (rc != 0) {
            const char* err = nsh_last_error();
            if (err && *err)
                std::fprintf(stderr, "noiseshape: %s: %s\n", command.c_str(), err);
        }
    }

    nsh_config_free(cfg);
    return rc;
}
