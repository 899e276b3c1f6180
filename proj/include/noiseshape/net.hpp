#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "noiseshape/config.hpp"
#include "noiseshape/toyflow.hpp"

// Velocity network v(x, t | cond): frozen random Fourier features of the 2D
// input, a stack of FiLM-modulated linear blocks with tanh, and a linear head.
// Gradients are exact reverse-mode derivatives written out by hand for this
// fixed architecture; everything runs batched through the dense kernels in
// linalg.hpp.

namespace noiseshape {

struct NetConfig {
    int rff_features = 128;  // even; rff_features/2 frozen frequencies
    int width = 128;
    int n_blocks = 3;
    int emb_dim = 16;
    int n_embeddings = 18;   // one slot per (bank, position) pair
    double rff_scale = 3.0;

    int cond_dim() const { return 3 + 3 + emb_dim + 1; }
    void validate() const;
};

// One-hot shape kind (3), padded shape parameters (3), learned seed embedding
// chosen by table index, then t appended as the last conditioning input.
struct ConditionVector {
    double onehot[3] = {0, 0, 0};
    double params[3] = {0, 0, 0};
    int emb_index = 0;
    double t = 0.0;
};

// Shape parameters enter at unit scale: circle (R,0,0), ellipse (A,B,0),
// spiral (b, theta_min/2pi, theta_max/2pi).
ConditionVector make_condition(const ShapeSpec& shape, int emb_index, double t);

// Every learnable tensor; grads and Adam moments reuse the same layout.
struct ParamTensors {
    struct Block {
        std::vector<double> w, b;    // linear: width x in, width
        std::vector<double> gw, gb;  // FiLM scale generator: width x cond_dim, width
        std::vector<double> hw, hb;  // FiLM shift generator: width x cond_dim, width
    };
    std::vector<Block> blocks;
    std::vector<double> head_w, head_b;  // 2 x width, 2
    std::vector<double> embed;           // n_embeddings x emb_dim

    void zero();
    // Visits tensors in a fixed order under stable names (block0_w, ...).
    void for_each(const std::function<void(const char*, std::vector<double>&)>& fn);
    void for_each_const(
        const std::function<void(const char*, const std::vector<double>&)>& fn) const;
};

ParamTensors make_tensors(const NetConfig& cfg);  // zero-initialized, right shapes

struct ModelParams {
    NetConfig cfg;
    std::vector<double> rff_b;  // frozen (rff_features/2) x 2, never trained
    ParamTensors p;
    int direction = +1;  // generation integrates dz/dt = direction * v
};

ModelParams init_model(const NetConfig& cfg, uint64_t master_seed);

// Row-major batch. cond carries a zeroed embedding slice that forward fills
// from the current table, so the batch can be reused across training steps.
struct Batch {
    int n = 0;
    int cond_dim = 0;
    std::vector<double> x;      // n x 2
    std::vector<double> cond;   // n x cond_dim
    std::vector<int> emb_idx;   // n
    std::vector<double> vstar;  // n x 2, empty when only predicting

    void reserve_rows(int rows, const NetConfig& cfg);
    void push(const double x_in[2], const ConditionVector& c, const double* v_target,
              const NetConfig& cfg);
    void clear();
};

struct ForwardCache {
    int n = 0;
    bool feat_valid = false;  // feat reusable only while batch.x is unchanged
    std::vector<double> feat;
    struct BlockCache {
        std::vector<double> a, gamma, h;
    };
    std::vector<BlockCache> blocks;
    std::vector<double> wt;  // transpose scratch
    std::vector<double> dh, dtmp, dz, da, dgam, dcond;
};

// v_out resized to n x 2. reuse_feat skips the Fourier stage when the cache
// already holds features for this batch's x.
void forward_batch(const ModelParams& m, Batch& batch, ForwardCache& cache,
                   std::vector<double>& v_out, bool reuse_feat = false);

void forward_one(const ModelParams& m, const double x[2], double t,
                 const ConditionVector& cond, double v_out[2]);

// Returns mean squared error (1/n) sum ||v - v*||^2 and fills grads (which
// must have the model's shapes; they are overwritten, not accumulated).
double loss_and_grad(const ModelParams& m, Batch& batch, ForwardCache& cache,
                     ParamTensors& grads, bool reuse_feat = false);

struct TrainConfig {
    int epochs = 2000;
    double learning_rate = 3e-4;
    double weight_decay = 0.0;  // decoupled, applied after the Adam step
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Minibatches with a seeded shuffle; both paths are deterministic. 0 = full
    // batch. The small default keeps the optimizer step count high enough to
    // memorize within the fixed epoch budget.
    int batch_size = 64;
    uint64_t master_seed = 12345;
    double overfit_threshold = 1e-3;
};

struct AdamState {
    ParamTensors m, v;
    int64_t step = 0;
};

AdamState make_adam_state(const NetConfig& cfg);
void adam_step(ParamTensors& params, const ParamTensors& grads, AdamState& st,
               const TrainConfig& tc);

struct DatasetEntry {
    ShapeSpec shape;
    uint64_t seed = 0;
    int emb_index = 0;
    std::vector<TrainingPair> pairs;
};

struct TrainResult {
    ModelParams model;             // best end-of-epoch snapshot by full-set MSE
    std::vector<double> loss_log;  // one running-mean MSE per epoch
    double final_loss = 0.0;       // full-set MSE of the returned model
    int best_epoch = 0;            // epoch whose snapshot was returned
    bool overfit_ok = false;
};

// Deterministic given (datasets, configs): fixed batch order, seeded init.
// Runs the full epoch budget, then returns the best end-of-epoch snapshot by
// full-set MSE; Adam's late-overfit spikes make the last state a poor pick.
// Throws a numeric error naming the epoch if the loss goes non-finite.
TrainResult train(const std::vector<DatasetEntry>& datasets, const NetConfig& ncfg,
                  const TrainConfig& tcfg);

// Checkpoint container: a text header of key = value lines (network config,
// training echo, caller metadata) followed by named flat arrays in hexfloat.
// save(load(save(x))) is byte-identical. Field names are listed in
// docs/FORMATS.md.
void save_checkpoint(const ModelParams& m, const Config& meta, const std::string& path);

struct Checkpoint {
    ModelParams model;
    Config meta;  // includes the network config echo
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace noiseshape
