#include "noiseshape/net.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "noiseshape/errors.hpp"
#include "noiseshape/linalg.hpp"
#include "noiseshape/rng.hpp"

namespace noiseshape {

static constexpr double kTwoPi = 6.283185307179586476925286766559;

void NetConfig::validate() const {
    if (rff_features < 2 || rff_features % 2 != 0)
        fail_usage("rff_features must be even and >= 2");
    if (width < 1 || n_blocks < 1 || emb_dim < 1 || n_embeddings < 1)
        fail_usage("network sizes must be positive");
    if (!(rff_scale > 0.0)) fail_usage("rff_scale must be positive");
}

ConditionVector make_condition(const ShapeSpec& shape, int emb_index, double t) {
    ConditionVector c;
    c.emb_index = emb_index;
    c.t = t;
    switch (shape.kind) {
        case ShapeSpec::Kind::Circle:
            c.onehot[0] = 1.0;
            c.params[0] = shape.R;
            break;
        case ShapeSpec::Kind::Ellipse:
            c.onehot[1] = 1.0;
            c.params[0] = shape.A;
            c.params[1] = shape.B;
            break;
        case ShapeSpec::Kind::Spiral:
            c.onehot[2] = 1.0;
            c.params[0] = shape.b;
            c.params[1] = shape.theta_min / kTwoPi;
            c.params[2] = shape.theta_max / kTwoPi;
            break;
    }
    return c;
}

void ParamTensors::zero() {
    for_each([](const char*, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
    });
}

void ParamTensors::for_each(
    const std::function<void(const char*, std::vector<double>&)>& fn) {
    char name[32];
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        Block& blk = blocks[i];
        std::snprintf(name, sizeof(name), "block%zu_w", i);
        fn(name, blk.w);
        std::snprintf(name, sizeof(name), "block%zu_b", i);
        fn(name, blk.b);
        std::snprintf(name, sizeof(name), "block%zu_gamma_w", i);
        fn(name, blk.gw);
        std::snprintf(name, sizeof(name), "block%zu_gamma_b", i);
        fn(name, blk.gb);
        std::snprintf(name, sizeof(name), "block%zu_beta_w", i);
        fn(name, blk.hw);
        std::snprintf(name, sizeof(name), "block%zu_beta_b", i);
        fn(name, blk.hb);
    }
    fn("head_w", head_w);
    fn("head_b", head_b);
    fn("embed", embed);
}

void ParamTensors::for_each_const(
    const std::function<void(const char*, const std::vector<double>&)>& fn) const {
    const_cast<ParamTensors*>(this)->for_each(
        [&](const char* name, std::vector<double>& v) { fn(name, v); });
}

ParamTensors make_tensors(const NetConfig& cfg) {
    cfg.validate();
    ParamTensors p;
    p.blocks.resize(cfg.n_blocks);
    const int cd = cfg.cond_dim();
    for (int i = 0; i < cfg.n_blocks; ++i) {
        const int in = i == 0 ? cfg.rff_features : cfg.width;
        auto& blk = p.blocks[i];
        blk.w.assign((std::size_t)cfg.width * in, 0.0);
        blk.b.assign(cfg.width, 0.0);
        blk.gw.assign((std::size_t)cfg.width * cd, 0.0);
        blk.gb.assign(cfg.width, 0.0);
        blk.hw.assign((std::size_t)cfg.width * cd, 0.0);
        blk.hb.assign(cfg.width, 0.0);
    }
    p.head_w.assign(2 * (std::size_t)cfg.width, 0.0);
    p.head_b.assign(2, 0.0);
    p.embed.assign((std::size_t)cfg.n_embeddings * cfg.emb_dim, 0.0);
    return p;
}

static void fill_scaled_normal(std::vector<double>& v, uint64_t seed, double scale) {
    GaussianRng rng(seed);
    for (double& x : v) x = rng.normal() * scale;
}

ModelParams init_model(const NetConfig& cfg, uint64_t master_seed) {
    cfg.validate();
    ModelParams m;
    m.cfg = cfg;
    m.p = make_tensors(cfg);

    m.rff_b.resize((std::size_t)(cfg.rff_features / 2) * 2);
    fill_scaled_normal(m.rff_b, derive_seed(master_seed, kStreamInit), 1.0);

    // 1/sqrt(fan_in) for the trunk; FiLM generators start small so the initial
    // modulation is near identity; embeddings moderate so conditions separate.
    const int cd = cfg.cond_dim();
    uint64_t idx = 1;
    m.p.for_each([&](const char* name, std::vector<double>& v) {
        const uint64_t seed = derive_seed(master_seed, kStreamInit + idx++);
        const std::string n(name);
        // every bias (block*_b, *_gamma_b, *_beta_b, head_b) starts at zero
        if (n.ends_with("_b")) return;
        if (n == "embed") {
            fill_scaled_normal(v, seed, 0.5);
        } else if (n.find("gamma_w") != std::string::npos ||
                   n.find("beta_w") != std::string::npos) {
            fill_scaled_normal(v, seed, 0.1 / std::sqrt((double)cd));
        } else if (n == "head_w") {
            fill_scaled_normal(v, seed, 1.0 / std::sqrt((double)cfg.width));
        } else {
            // block trunk weight: fan_in is rff_features for block 0, else width
            const std::size_t fan_in = v.size() / cfg.width;
            fill_scaled_normal(v, seed, 1.0 / std::sqrt((double)fan_in));
        }
    });
    return m;
}

void Batch::reserve_rows(int rows, const NetConfig& cfg) {
    cond_dim = cfg.cond_dim();
    x.reserve((std::size_t)rows * 2);
    cond.reserve((std::size_t)rows * cond_dim);
    emb_idx.reserve(rows);
    vstar.reserve((std::size_t)rows * 2);
}

void Batch::push(const double x_in[2], const ConditionVector& c, const double* v_target,
                 const NetConfig& cfg) {
    if (cond_dim == 0) cond_dim = cfg.cond_dim();
    if (c.emb_index < 0 || c.emb_index >= cfg.n_embeddings)
        fail_usage("condition embedding index out of range");
    x.push_back(x_in[0]);
    x.push_back(x_in[1]);
    cond.push_back(c.onehot[0]);
    cond.push_back(c.onehot[1]);
    cond.push_back(c.onehot[2]);
    cond.push_back(c.params[0]);
    cond.push_back(c.params[1]);
    cond.push_back(c.params[2]);
    for (int j = 0; j < cfg.emb_dim; ++j) cond.push_back(0.0);  // filled at forward
    cond.push_back(c.t);
    emb_idx.push_back(c.emb_index);
    if (v_target) {
        vstar.push_back(v_target[0]);
        vstar.push_back(v_target[1]);
    }
    ++n;
}

void Batch::clear() {
    n = 0;
    x.clear();
    cond.clear();
    emb_idx.clear();
    vstar.clear();
}

static void ensure_cache(const ModelParams& m, int n, ForwardCache& cache) {
    const NetConfig& cfg = m.cfg;
    const std::size_t nw = (std::size_t)n * cfg.width;
    if (cache.n != n) cache.feat_valid = false;
    cache.n = n;
    cache.feat.resize((std::size_t)n * cfg.rff_features);
    cache.blocks.resize(cfg.n_blocks);
    for (auto& blk : cache.blocks) {
        blk.a.resize(nw);
        blk.gamma.resize(nw);
        blk.h.resize(nw);
    }
    const std::size_t wide = (std::size_t)n * std::max(cfg.rff_features, cfg.width);
    cache.wt.resize((std::size_t)std::max(cfg.rff_features, cfg.width) *
                    std::max({cfg.width, cfg.cond_dim(), 2}));
    cache.dh.resize(wide);
    cache.dtmp.resize(wide);
    cache.dz.resize(nw);
    cache.da.resize(nw);
    cache.dgam.resize(nw);
    cache.dcond.resize((std::size_t)n * cfg.cond_dim());
}

static void add_bias_rows(double* a, const double* b, int n, int w) {
    for (int i = 0; i < n; ++i) {
        double* row = a + (std::size_t)i * w;
        for (int j = 0; j < w; ++j) row[j] += b[j];
    }
}

void forward_batch(const ModelParams& m, Batch& batch, ForwardCache& cache,
                   std::vector<double>& v_out, bool reuse_feat) {
    const NetConfig& cfg = m.cfg;
    const int n = batch.n;
    if (n == 0) fail_usage("forward: empty batch");
    if (batch.cond_dim != cfg.cond_dim()) fail_usage("forward: condition width mismatch");
    ensure_cache(m, n, cache);
    const int cd = cfg.cond_dim();
    const int W = cfg.width;
    const int F = cfg.rff_features;
    const int F2 = F / 2;

    // refresh the learned embedding slice (columns 6 .. 6+emb_dim)
    for (int i = 0; i < n; ++i) {
        const double* e = &m.p.embed[(std::size_t)batch.emb_idx[i] * cfg.emb_dim];
        double* crow = &batch.cond[(std::size_t)i * cd + 6];
        std::memcpy(crow, e, sizeof(double) * cfg.emb_dim);
    }

    if (!(reuse_feat && cache.feat_valid)) {
        // feat = [cos(scale * B x); sin(scale * B x)]
        transpose(m.rff_b.data(), cache.wt.data(), F2, 2);  // 2 x F2
        // dtmp holds the n x F2 projection
        matmul_nn(batch.x.data(), cache.wt.data(), cache.dtmp.data(), n, 2, F2);
        for (int i = 0; i < n; ++i) {
            const double* u = &cache.dtmp[(std::size_t)i * F2];
            double* f = &cache.feat[(std::size_t)i * F];
            for (int j = 0; j < F2; ++j) {
                const double arg = cfg.rff_scale * u[j];
                f[j] = std::cos(arg);
                f[F2 + j] = std::sin(arg);
            }
        }
        cache.feat_valid = true;
    }

    const double* h_prev = cache.feat.data();
    int in_dim = F;
    for (int blk = 0; blk < cfg.n_blocks; ++blk) {
        const auto& P = m.p.blocks[blk];
        auto& C = cache.blocks[blk];
        transpose(P.w.data(), cache.wt.data(), W, in_dim);
        matmul_nn(h_prev, cache.wt.data(), C.a.data(), n, in_dim, W);
        add_bias_rows(C.a.data(), P.b.data(), n, W);

        transpose(P.gw.data(), cache.wt.data(), W, cd);
        matmul_nn(batch.cond.data(), cache.wt.data(), C.gamma.data(), n, cd, W);
        add_bias_rows(C.gamma.data(), P.gb.data(), n, W);

        // shift generator output lands in dz as scratch
        transpose(P.hw.data(), cache.wt.data(), W, cd);
        matmul_nn(batch.cond.data(), cache.wt.data(), cache.dz.data(), n, cd, W);
        add_bias_rows(cache.dz.data(), P.hb.data(), n, W);

        for (std::size_t i = 0; i < (std::size_t)n * W; ++i)
            C.h[i] = std::tanh((1.0 + C.gamma[i]) * C.a[i] + cache.dz[i]);

        h_prev = C.h.data();
        in_dim = W;
    }

    v_out.resize((std::size_t)n * 2);
    transpose(m.p.head_w.data(), cache.wt.data(), 2, W);
    matmul_nn(h_prev, cache.wt.data(), v_out.data(), n, W, 2);
    add_bias_rows(v_out.data(), m.p.head_b.data(), n, 2);
}

void forward_one(const ModelParams& m, const double x[2], double t,
                 const ConditionVector& cond, double v_out[2]) {
    if (!(t >= -1e-9 && t <= 1.0 + 1e-9)) fail_usage("forward: t outside [0, 1]");
    ConditionVector c = cond;
    c.t = t;
    Batch b;
    b.push(x, c, nullptr, m.cfg);
    ForwardCache cache;
    std::vector<double> v;
    forward_batch(m, b, cache, v);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
        fail_numeric("forward produced a non-finite velocity");
    v_out[0] = v[0];
    v_out[1] = v[1];
}

static void colsum(const double* a, double* out, int n, int w) {
    std::fill(out, out + w, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = a + (std::size_t)i * w;
        for (int j = 0; j < w; ++j) out[j] += row[j];
    }
}

double loss_and_grad(const ModelParams& m, Batch& batch, ForwardCache& cache,
                     ParamTensors& grads, bool reuse_feat) {
    const NetConfig& cfg = m.cfg;
    const int n = batch.n;
    if (n == 0) fail_usage("loss_and_grad: empty batch");
    if ((int)batch.vstar.size() != n * 2) fail_usage("loss_and_grad: missing targets");

    std::vector<double> v;
    forward_batch(m, batch, cache, v, reuse_feat);

    const int W = cfg.width;
    const int cd = cfg.cond_dim();

    // dv = (2/n) (v - v*); loss = (1/n) sum ||v - v*||^2
    double loss = 0.0;
    std::vector<double> dv((std::size_t)n * 2);
    const double inv_n = 1.0 / (double)n;
    for (std::size_t i = 0; i < (std::size_t)n * 2; ++i) {
        const double d = v[i] - batch.vstar[i];
        loss += d * d;
        dv[i] = 2.0 * d * inv_n;
    }
    loss *= inv_n;

    grads.zero();

    const double* h_last = cache.blocks[cfg.n_blocks - 1].h.data();
    matmul_tn(dv.data(), h_last, grads.head_w.data(), n, 2, W);
    colsum(dv.data(), grads.head_b.data(), n, 2);
    // dh = dv * head_w
    matmul_nn(dv.data(), m.p.head_w.data(), cache.dh.data(), n, 2, W);

    std::fill(cache.dcond.begin(), cache.dcond.end(), 0.0);

    for (int blk = cfg.n_blocks - 1; blk >= 0; --blk) {
        const auto& P = m.p.blocks[blk];
        auto& G = grads.blocks[blk];
        const auto& C = cache.blocks[blk];
        const int in_dim = blk == 0 ? cfg.rff_features : W;
        const double* input = blk == 0 ? cache.feat.data() : cache.blocks[blk - 1].h.data();

        for (std::size_t i = 0; i < (std::size_t)n * W; ++i) {
            const double dzi = cache.dh[i] * (1.0 - C.h[i] * C.h[i]);
            cache.dz[i] = dzi;                        // also the shift gradient
            cache.da[i] = dzi * (1.0 + C.gamma[i]);
            cache.dgam[i] = dzi * C.a[i];
        }

        matmul_tn(cache.da.data(), input, G.w.data(), n, W, in_dim);
        colsum(cache.da.data(), G.b.data(), n, W);
        matmul_tn(cache.dgam.data(), batch.cond.data(), G.gw.data(), n, W, cd);
        colsum(cache.dgam.data(), G.gb.data(), n, W);
        matmul_tn(cache.dz.data(), batch.cond.data(), G.hw.data(), n, W, cd);
        colsum(cache.dz.data(), G.hb.data(), n, W);

        matmul_nn(cache.dgam.data(), P.gw.data(), cache.dcond.data(), n, W, cd, true);
        matmul_nn(cache.dz.data(), P.hw.data(), cache.dcond.data(), n, W, cd, true);

        if (blk > 0) {
            matmul_nn(cache.da.data(), P.w.data(), cache.dtmp.data(), n, W, in_dim);
            std::swap(cache.dh, cache.dtmp);
        }
    }

    // scatter the condition gradient's embedding slice into the table
    for (int i = 0; i < n; ++i) {
        const double* src = &cache.dcond[(std::size_t)i * cd + 6];
        double* dst = &grads.embed[(std::size_t)batch.emb_idx[i] * cfg.emb_dim];
        for (int j = 0; j < cfg.emb_dim; ++j) dst[j] += src[j];
    }

    return loss;
}

AdamState make_adam_state(const NetConfig& cfg) {
    AdamState st;
    st.m = make_tensors(cfg);
    st.v = make_tensors(cfg);
    st.step = 0;
    return st;
}

void adam_step(ParamTensors& params, const ParamTensors& grads, AdamState& st,
               const TrainConfig& tc) {
    st.step += 1;
    const double b1 = tc.adam_beta1, b2 = tc.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, (double)st.step);
    const double bc2 = 1.0 - std::pow(b2, (double)st.step);
    const double lr = tc.learning_rate;

    // walk the three structures in lockstep; layout is identical by construction
    std::vector<std::vector<double>*> ps, ms, vs;
    std::vector<const std::vector<double>*> gs;
    params.for_each([&](const char*, std::vector<double>& t) { ps.push_back(&t); });
    grads.for_each_const([&](const char*, const std::vector<double>& t) { gs.push_back(&t); });
    st.m.for_each([&](const char*, std::vector<double>& t) { ms.push_back(&t); });
    st.v.for_each([&](const char*, std::vector<double>& t) { vs.push_back(&t); });

    for (std::size_t k = 0; k < ps.size(); ++k) {
        auto& p = *ps[k];
        const auto& g = *gs[k];
        auto& mm = *ms[k];
        auto& vv = *vs[k];
        if (p.size() != g.size()) fail_usage("adam_step: shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            mm[i] = b1 * mm[i] + (1.0 - b1) * g[i];
            vv[i] = b2 * vv[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = mm[i] / bc1;
            const double vhat = vv[i] / bc2;
            p[i] -= lr * (mhat / (std::sqrt(vhat) + tc.adam_eps));
            if (tc.weight_decay != 0.0) p[i] -= lr * tc.weight_decay * p[i];
        }
    }
}

static Batch build_full_batch(const std::vector<DatasetEntry>& datasets,
                              const NetConfig& cfg) {
    Batch batch;
    std::size_t rows = 0;
    for (const auto& d : datasets)
        for (const auto& p : d.pairs) rows += p.t_grid.size();
    batch.reserve_rows((int)rows, cfg);
    for (const auto& d : datasets) {
        for (const auto& p : d.pairs) {
            for (double t : p.t_grid) {
                double xt[2], vs[2];
                interpolant(p, t, xt, vs);
                batch.push(xt, make_condition(d.shape, d.emb_index, t), vs, cfg);
            }
        }
    }
    return batch;
}

TrainResult train(const std::vector<DatasetEntry>& datasets, const NetConfig& ncfg,
                  const TrainConfig& tcfg) {
    if (datasets.empty()) fail_usage("train: no datasets");
    if (tcfg.epochs < 1) fail_usage("train: epochs must be >= 1");
    if (!(tcfg.learning_rate > 0.0)) fail_usage("train: learning rate must be positive");
    for (const auto& d : datasets) {
        if (d.pairs.empty()) fail_usage("train: dataset with no pairs");
        if (d.emb_index < 0 || d.emb_index >= ncfg.n_embeddings)
            fail_usage("train: embedding index out of range");
    }

    TrainResult res;
    res.model = init_model(ncfg, tcfg.master_seed);
    ParamTensors grads = make_tensors(ncfg);
    AdamState adam = make_adam_state(ncfg);
    ForwardCache cache;

    Batch full = build_full_batch(datasets, ncfg);
    res.loss_log.reserve(tcfg.epochs);

    // Adam's late-overfit loss spikes make the last epoch a poor pick, so the
    // returned model is the best end-of-epoch state by full-set MSE.
    ParamTensors best_p = res.model.p;
    double best_loss = std::numeric_limits<double>::infinity();
    auto consider = [&](double loss, int epoch) {
        if (loss < best_loss) {
            best_loss = loss;
            best_p = res.model.p;
            res.best_epoch = epoch;
        }
    };

    if (tcfg.batch_size <= 0 || tcfg.batch_size >= full.n) {
        // full batch: x never changes, so Fourier features are computed once
        for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
            const double loss = loss_and_grad(res.model, full, cache, grads, epoch > 0);
            if (!std::isfinite(loss))
                fail_numeric("training diverged at epoch " + std::to_string(epoch));
            consider(loss, epoch);
            adam_step(res.model.p, grads, adam, tcfg);
            res.loss_log.push_back(loss);
        }
        consider(loss_and_grad(res.model, full, cache, grads, true), tcfg.epochs);
    } else {
        // chunked minibatches over a seeded per-epoch permutation
        Xoshiro256pp shuffler(derive_seed(tcfg.master_seed, kStreamInit + 9999));
        std::vector<int> order(full.n);
        Batch sub;
        ForwardCache eval_cache;
        ParamTensors eval_grads = make_tensors(ncfg);
        const int cd = ncfg.cond_dim();
        for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
            for (int i = 0; i < full.n; ++i) order[i] = i;
            for (int i = full.n - 1; i > 0; --i) {
                const int j = (int)(shuffler.next() % (uint64_t)(i + 1));
                std::swap(order[i], order[j]);
            }
            double epoch_loss = 0.0;
            for (int start = 0; start < full.n; start += tcfg.batch_size) {
                const int cnt = std::min(tcfg.batch_size, full.n - start);
                sub.clear();
                sub.cond_dim = cd;
                for (int k = 0; k < cnt; ++k) {
                    const int r = order[start + k];
                    sub.x.push_back(full.x[(std::size_t)r * 2]);
                    sub.x.push_back(full.x[(std::size_t)r * 2 + 1]);
                    for (int c = 0; c < cd; ++c)
                        sub.cond.push_back(full.cond[(std::size_t)r * cd + c]);
                    sub.emb_idx.push_back(full.emb_idx[r]);
                    sub.vstar.push_back(full.vstar[(std::size_t)r * 2]);
                    sub.vstar.push_back(full.vstar[(std::size_t)r * 2 + 1]);
                    ++sub.n;
                }
                const double loss = loss_and_grad(res.model, sub, cache, grads, false);
                if (!std::isfinite(loss))
                    fail_numeric("training diverged at epoch " + std::to_string(epoch));
                adam_step(res.model.p, grads, adam, tcfg);
                epoch_loss += loss * cnt;
            }
            res.loss_log.push_back(epoch_loss / full.n);
            consider(loss_and_grad(res.model, full, eval_cache, eval_grads, epoch > 0),
                     epoch);
        }
    }

    // Log entries track the moving parameters; the memorization verdict is the
    // returned snapshot scored on the full set.
    res.model.p = best_p;
    res.final_loss = best_loss;
    res.overfit_ok = res.final_loss < tcfg.overfit_threshold;
    return res;
}

// ---- checkpoint io ----

static const char* kCheckpointHeader = "noiseshape checkpoint v1";

void save_checkpoint(const ModelParams& m, const Config& meta, const std::string& path) {
    Config cfg = meta;
    cfg.set_int("net.rff_features", m.cfg.rff_features);
    cfg.set_int("net.width", m.cfg.width);
    cfg.set_int("net.n_blocks", m.cfg.n_blocks);
    cfg.set_int("net.emb_dim", m.cfg.emb_dim);
    cfg.set_int("net.n_embeddings", m.cfg.n_embeddings);
    cfg.set("net.rff_scale", format_real_hex(m.cfg.rff_scale));
    cfg.set_int("net.direction", m.direction);

    std::ostringstream out;
    out << kCheckpointHeader << "\n";
    out << cfg.serialize();

    std::vector<std::pair<std::string, const std::vector<double>*>> arrays;
    arrays.emplace_back("rff_b", &m.rff_b);
    m.p.for_each_const([&](const char* name, const std::vector<double>& v) {
        arrays.emplace_back(name, &v);
    });

    out << "arrays " << arrays.size() << "\n";
    for (const auto& [name, vec] : arrays) {
        out << "array " << name << " " << vec->size() << "\n";
        for (std::size_t i = 0; i < vec->size(); ++i) {
            out << format_real_hex((*vec)[i]);
            out << (((i + 1) % 8 == 0 || i + 1 == vec->size()) ? '\n' : ' ');
        }
    }
    out << "end\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot write checkpoint: " + path);
    f << out.str();
    if (!f) fail_usage("checkpoint write failed: " + path);
}

[[noreturn]] static void format_error(const std::string& path, int line,
                                      const std::string& what) {
    fail_usage("checkpoint format error in " + path + " at line " +
               std::to_string(line) + ": " + what);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot read checkpoint: " + path);

    std::string line;
    int lineno = 0;
    auto next_line = [&](const char* expect_what) {
        if (!std::getline(f, line)) format_error(path, lineno, std::string("truncated, expected ") + expect_what);
        ++lineno;
    };

    next_line("header");
    if (line != kCheckpointHeader) format_error(path, lineno, "bad header");

    std::string config_text;
    std::size_t n_arrays = 0;
    for (;;) {
        next_line("config or arrays count");
        if (line.rfind("arrays ", 0) == 0) {
            n_arrays = std::stoul(line.substr(7));
            break;
        }
        config_text += line;
        config_text += '\n';
    }
    Config meta = Config::parse_string(config_text);

    NetConfig ncfg;
    ncfg.rff_features = (int)meta.get_int("net.rff_features", 0);
    ncfg.width = (int)meta.get_int("net.width", 0);
    ncfg.n_blocks = (int)meta.get_int("net.n_blocks", 0);
    ncfg.emb_dim = (int)meta.get_int("net.emb_dim", 0);
    ncfg.n_embeddings = (int)meta.get_int("net.n_embeddings", 0);
    ncfg.rff_scale = meta.get_real("net.rff_scale", 0.0);
    ncfg.validate();

    ModelParams m;
    m.cfg = ncfg;
    m.p = make_tensors(ncfg);
    m.direction = (int)meta.get_int("net.direction", 1);
    if (m.direction != 1 && m.direction != -1)
        format_error(path, lineno, "net.direction must be 1 or -1");

    std::vector<std::pair<std::string, std::vector<double>*>> arrays;
    arrays.emplace_back("rff_b", &m.rff_b);
    m.rff_b.resize((std::size_t)(ncfg.rff_features / 2) * 2);
    m.p.for_each([&](const char* name, std::vector<double>& v) {
        arrays.emplace_back(name, &v);
    });
    if (n_arrays != arrays.size())
        format_error(path, lineno, "unexpected array count");

    for (auto& [name, vec] : arrays) {
        next_line("array header");
        std::istringstream hs(line);
        std::string kw, got_name;
        std::size_t len = 0;
        hs >> kw >> got_name >> len;
        if (kw != "array" || got_name != name || len != vec->size())
            format_error(path, lineno, "expected 'array " + name + " " +
                                           std::to_string(vec->size()) + "', got '" + line + "'");
        std::size_t i = 0;
        while (i < len) {
            next_line("array values");
            std::istringstream vs(line);
            std::string tok;
            while (vs >> tok) {
                if (i >= len) format_error(path, lineno, "too many values in " + name);
                char* end = nullptr;
                const double val = std::strtod(tok.c_str(), &end);
                if (end == tok.c_str() || *end != '\0')
                    format_error(path, lineno, "bad value '" + tok + "'");
                (*vec)[i++] = val;
            }
        }
    }
    next_line("end marker");
    if (line != "end") format_error(path, lineno, "missing end marker");

    return Checkpoint{std::move(m), std::move(meta)};
}

}  // namespace noiseshape
