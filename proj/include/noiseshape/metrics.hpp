#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noiseshape/inject.hpp"
#include "noiseshape/net.hpp"

namespace noiseshape {

// Symmetric mean nearest-neighbor distance between two flattened (x, y) point
// sets, unsquared Euclidean:
//   0.5 * (mean over a of min dist to b + mean over b of min dist to a).
// The accelerated version prunes by sorted x coordinate; chamfer_naive is the
// O(|a| |b|) reference both are tested against.
double chamfer(const std::vector<double>& a, const std::vector<double>& b);
double chamfer_naive(const std::vector<double>& a, const std::vector<double>& b);

// exp(-chamfer_value), in (0, 1], strictly decreasing.
double fit_score(double chamfer_value);

// Linear-interpolation quantile of an already sorted sample, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

// The toy world the joint model is trained on: three shapes, six dataset seeds
// per shape, one embedding slot per (shape, seed-position) pair.
struct ToySetup {
    std::vector<ShapeSpec> shapes;
    SeedBank banks;
    int n_pairs = 16;
    int grid_size = 3;

    static ToySetup defaults();
    void validate() const;

    int positions_per_shape() const;
    int emb_index(int shape_idx, int pos) const;
    const std::vector<uint64_t>& bank_of(int shape_idx) const;
    int shape_index(const std::string& name) const;  // usage error if unknown

    std::vector<DatasetEntry> build_datasets() const;  // one entry per (shape, seed)

    Config to_config() const;                   // keys under toy.*
    static ToySetup from_config(const Config&); // usage error on missing keys
};

// Velocity denoiser over a flattened set of 2D points sharing one condition.
// The opaque condition vector is encode_condition() output; predict rewrites
// its t slot per call and batches all points through the network.
std::vector<double> encode_condition(const ConditionVector& c);
ConditionVector decode_condition(const std::vector<double>& enc);
Denoiser make_set_denoiser(const ModelParams& m);

// Integrates every point of the flattened set from t=0 to t=1 with Heun,
// applying the model's direction convention.
std::vector<double> integrate_set(const ModelParams& m, const ConditionVector& cond,
                                  const std::vector<double>& z_set, int heun_steps);

struct ExperimentConfig {
    int points_per_sample = 256;  // M independent points per generated sample
    int repeats = 20;             // R
    int n_erase = 10;             // sources averaged by the erased protocol
    int tpw_k = 10;               // aggregation steps for the injected protocol
    double delta = 0.5;           // injection strength
    double center = 0.0;          // weight-schedule vertex (flow time)
    int heun_steps = 40;
    int curve_points = 512;       // reference-curve resolution

    void validate() const;
};

struct ProtocolStats {
    std::string name;
    std::vector<double> chamfer_values;  // one per repeat
    std::vector<double> fit_values;
    double median = 0.0;
    double q25 = 0.0, q75 = 0.0;
    double iqr = 0.0;
};

struct ExperimentReport {
    std::string shape;
    int repeats = 0;
    bool untrained_warning = false;  // checkpoint meta loss above its threshold
    double checkpoint_loss = 0.0;
    ProtocolStats matched, mismatched, erased, injected;

    const ProtocolStats* find(const std::string& name) const;
};

// Four-protocol evaluation of one target shape against its reference curve.
// Per repeat r the schedule cycles bank entries so that no two repeats within
// r < 20 share the same (target seed, mismatch source, erase set):
//   Matched     condition and noise of the target entry; the noise stream is
//               the entry's own x0 stream, so M = n_pairs reproduces the
//               training inputs bit for bit.
//   Mismatched  target shape condition but the embedding and noise of an
//               entry from a different shape.
//   Erased      mismatched condition, noise averaged over n_erase entries of
//               the other shapes' banks.
//   Injected    mismatched condition and noise, adjusted by the model's own
//               aggregated velocity prediction (z + delta * v_agg).
ExperimentReport run_experiment(const Checkpoint& ckpt, const ToySetup& setup,
                                int target_shape, const ExperimentConfig& cfg);

// condition,repeat,chamfer,fit rows for one report.
std::string experiment_csv(const ExperimentReport& rep);
// Machine-readable summary (JSON) of medians and quartiles per protocol.
std::string experiment_summary_json(const std::vector<ExperimentReport>& reports);

}  // namespace noiseshape
