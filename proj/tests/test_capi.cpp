#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "noiseshape.h"

// The C++ side, used only to produce fixtures and expected values.
#include "noiseshape/metrics.hpp"
#include "noiseshape/net.hpp"
#include "noiseshape/noise.hpp"
#include "noiseshape/oracle.hpp"
#include "noiseshape/rng.hpp"

namespace {

std::string tiny_checkpoint_path() {
    static std::string path;
    if (!path.empty()) return path;
    using namespace noiseshape;
    ToySetup setup = ToySetup::defaults();
    setup.n_pairs = 6;
    setup.grid_size = 2;
    NetConfig ncfg;
    ncfg.rff_features = 8;
    ncfg.width = 16;
    ncfg.emb_dim = 4;
    ncfg.n_embeddings = 18;
    TrainConfig tcfg;
    tcfg.epochs = 2;
    TrainResult tr = train(setup.build_datasets(), ncfg, tcfg);
    Config meta = setup.to_config();
    meta.set_real("train.final_loss", tr.final_loss);
    path = "/tmp/nshp_capi_ckpt.txt";
    save_checkpoint(tr.model, meta, path);
    return path;
}

}  // namespace

TEST_CASE("config set/get round-trip and missing keys") {
    nsh_config* cfg = nsh_config_new();
    REQUIRE(cfg != nullptr);
    CHECK(nsh_config_set(cfg, "seed", "42") == NSH_OK);
    CHECK(std::string(nsh_config_get(cfg, "seed")) == "42");
    CHECK(nsh_config_get(cfg, "missing") == nullptr);
    CHECK(nsh_config_set(cfg, "", "x") == NSH_USAGE_ERROR);
    CHECK(std::string(nsh_last_error()).size() > 0);
    nsh_config_free(cfg);
    nsh_config_free(nullptr);  // must be a no-op
}

TEST_CASE("config file loading merges under programmatic overrides") {
    std::string path = "/tmp/nshp_capi_cfg.txt";
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("alpha = 1\nbeta = 2\n", f);
    std::fclose(f);
    nsh_config* cfg = nsh_config_new();
    nsh_config_set(cfg, "beta", "99");
    CHECK(nsh_config_load_file(cfg, path.c_str()) == NSH_OK);
    CHECK(std::string(nsh_config_get(cfg, "alpha")) == "1");
    // A key set before loading wins over the file value.
    CHECK(std::string(nsh_config_get(cfg, "beta")) == "99");
    CHECK(nsh_config_load_file(cfg, "/tmp/nshp_missing_cfg.txt") == NSH_USAGE_ERROR);
    nsh_config_free(cfg);
    std::remove(path.c_str());
}

TEST_CASE("gaussian sampling through the C API matches the C++ stack") {
    std::vector<double> out(16);
    CHECK(nsh_sample_gaussian(2024, out.data(), 16) == NSH_OK);
    noiseshape::NoiseTensor expect = noiseshape::sample_gaussian(2024, {16});
    for (int i = 0; i < 16; ++i) CHECK(out[i] == expect.data[i]);
    CHECK(nsh_sample_gaussian(1, nullptr, 4) == NSH_USAGE_ERROR);
    CHECK(nsh_sample_gaussian(1, out.data(), 0) == NSH_USAGE_ERROR);
}

TEST_CASE("erasure through the C API") {
    std::vector<double> sources = {1.0, 2.0, 3.0, 4.0};  // two length-2 tensors
    std::vector<double> out(2);
    CHECK(nsh_erase(sources.data(), 2, 2, out.data()) == NSH_OK);
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(out[0] == doctest::Approx((1.0 + 3.0) * inv).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx((2.0 + 4.0) * inv).epsilon(1e-15));
    CHECK(nsh_erase(nullptr, 2, 2, out.data()) == NSH_USAGE_ERROR);
    CHECK(nsh_erase(sources.data(), 0, 2, out.data()) == NSH_USAGE_ERROR);
}

TEST_CASE("scalar helpers mirror the library and signal invalid input") {
    CHECK(nsh_mi_per_source(4, 8) ==
          doctest::Approx(noiseshape::mi_per_source(4, 8)).epsilon(1e-15));
    CHECK(nsh_mi_per_source(1, 8) < 0.0);
    CHECK(nsh_cost_ratio(50, 10, 0.1, 10) == 1.22);
    CHECK(nsh_cost_ratio(0, 10, 0.1, 10) < 0.0);
}

TEST_CASE("verify command runs through nsh_run and reports") {
    nsh_config* cfg = nsh_config_new();
    nsh_config_set(cfg, "check", "cost");
    nsh_config_set(cfg, "out", "/tmp/nshp_capi_runs");
    CHECK(nsh_run(cfg, "verify") == NSH_OK);
    std::string report = nsh_last_report();
    CHECK(report.find("PASS") != std::string::npos);
    CHECK(report.find("cost") != std::string::npos);
    std::string outdir = nsh_last_outdir();
    CHECK(outdir.find("/tmp/nshp_capi_runs") == 0);
    nsh_config_free(cfg);
}

TEST_CASE("unknown commands and null handles are usage errors") {
    nsh_config* cfg = nsh_config_new();
    CHECK(nsh_run(cfg, "transmogrify") == NSH_USAGE_ERROR);
    CHECK(std::string(nsh_last_error()).find("transmogrify") != std::string::npos);
    CHECK(nsh_run(nullptr, "verify") == NSH_USAGE_ERROR);
    CHECK(nsh_run(cfg, nullptr) == NSH_USAGE_ERROR);
    nsh_config_free(cfg);
}

TEST_CASE("model loading and prediction") {
    std::string ckpt = tiny_checkpoint_path();
    nsh_model* m = nsh_model_load(ckpt.c_str());
    REQUIRE(m != nullptr);
    double out[2] = {0, 0};
    CHECK(nsh_model_predict(m, 0.3, -0.2, 0.5, "circle", 0, out) == NSH_OK);
    CHECK(std::isfinite(out[0]));
    CHECK(std::isfinite(out[1]));

    // Against the C++ forward pass.
    using namespace noiseshape;
    Checkpoint ck = load_checkpoint(ckpt);
    ToySetup setup = ToySetup::from_config(ck.meta);
    ConditionVector cv = make_condition(setup.shapes[0], setup.emb_index(0, 0), 0.5);
    double x[2] = {0.3, -0.2};
    double expect[2];
    forward_one(ck.model, x, 0.5, cv, expect);
    CHECK(out[0] == expect[0]);
    CHECK(out[1] == expect[1]);

    CHECK(nsh_model_predict(m, 0.3, -0.2, 0.5, "hexagon", 0, out) == NSH_USAGE_ERROR);
    CHECK(nsh_model_predict(m, 0.3, -0.2, 0.5, "circle", 99, out) == NSH_USAGE_ERROR);
    CHECK(nsh_model_predict(m, 0.3, -0.2, 5.0, "circle", 0, out) == NSH_USAGE_ERROR);
    CHECK(nsh_model_predict(nullptr, 0.3, -0.2, 0.5, "circle", 0, out) == NSH_USAGE_ERROR);
    nsh_model_free(m);
    nsh_model_free(nullptr);

    CHECK(nsh_model_load("/tmp/nshp_no_such_ckpt.txt") == nullptr);
    CHECK(std::string(nsh_last_error()).size() > 0);
}

TEST_CASE("last error resets after a successful call") {
    nsh_config* cfg = nsh_config_new();
    CHECK(nsh_run(cfg, "bogus") == NSH_USAGE_ERROR);
    CHECK(std::string(nsh_last_error()).size() > 0);
    std::vector<double> out(2);
    CHECK(nsh_sample_gaussian(7, out.data(), 2) == NSH_OK);
    CHECK(std::string(nsh_last_error()).empty());
    nsh_config_free(cfg);
}
