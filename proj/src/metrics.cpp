#include "noiseshape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "noiseshape/csvio.hpp"
#include "noiseshape/errors.hpp"
#include "noiseshape/rng.hpp"
#include "noiseshape/sampler.hpp"

namespace noiseshape {

static void check_point_set(const std::vector<double>& a, const char* what) {
    if (a.empty()) fail_usage(std::string(what) + ": empty point set");
    if (a.size() % 2 != 0) fail_usage(std::string(what) + ": odd-length point set");
}

double chamfer_naive(const std::vector<double>& a, const std::vector<double>& b) {
    check_point_set(a, "chamfer");
    check_point_set(b, "chamfer");
    const std::size_t na = a.size() / 2, nb = b.size() / 2;
    auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
        const std::size_t nf = from.size() / 2, nt = to.size() / 2;
        double total = 0.0;
        for (std::size_t i = 0; i < nf; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < nt; ++j) {
                const double dx = from[2 * i] - to[2 * j];
                const double dy = from[2 * i + 1] - to[2 * j + 1];
                best = std::min(best, dx * dx + dy * dy);
            }
            total += std::sqrt(best);
        }
        return total / (double)nf;
    };
    (void)na;
    (void)nb;
    return 0.5 * (directed(a, b) + directed(b, a));
}

// Directed mean min-distance with x-sorted pruning: for each query, scan
// candidates outward from the insertion point and stop once the x gap alone
// exceeds the best squared distance found.
static double directed_pruned(const std::vector<double>& from,
                              const std::vector<std::size_t>& order_to,
                              const std::vector<double>& to) {
    const std::size_t nf = from.size() / 2, nt = order_to.size();
    double total = 0.0;
    std::vector<double> xs(nt);
    for (std::size_t j = 0; j < nt; ++j) xs[j] = to[2 * order_to[j]];
    for (std::size_t i = 0; i < nf; ++i) {
        const double px = from[2 * i], py = from[2 * i + 1];
        const std::size_t pos =
            (std::size_t)(std::lower_bound(xs.begin(), xs.end(), px) - xs.begin());
        double best = std::numeric_limits<double>::infinity();
        std::size_t lo = pos, hi = pos;
        for (;;) {
            bool advanced = false;
            if (lo > 0) {
                const double gap = px - xs[lo - 1];
                if (gap * gap < best) {
                    --lo;
                    const std::size_t j = order_to[lo];
                    const double dx = px - to[2 * j], dy = py - to[2 * j + 1];
                    best = std::min(best, dx * dx + dy * dy);
                    advanced = true;
                }
            }
            if (hi < nt) {
                const double gap = xs[hi] - px;
                if (gap * gap < best) {
                    const std::size_t j = order_to[hi];
                    const double dx = px - to[2 * j], dy = py - to[2 * j + 1];
                    best = std::min(best, dx * dx + dy * dy);
                    ++hi;
                    advanced = true;
                }
            }
            if (!advanced) break;
        }
        total += std::sqrt(best);
    }
    return total / (double)nf;
}

double chamfer(const std::vector<double>& a, const std::vector<double>& b) {
    check_point_set(a, "chamfer");
    check_point_set(b, "chamfer");
    auto sort_by_x = [](const std::vector<double>& pts) {
        std::vector<std::size_t> order(pts.size() / 2);
        std::iota(order.begin(), order.end(), (std::size_t)0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return pts[2 * i] < pts[2 * j];
        });
        return order;
    };
    const std::vector<std::size_t> oa = sort_by_x(a), ob = sort_by_x(b);
    return 0.5 * (directed_pruned(a, ob, b) + directed_pruned(b, oa, a));
}

double fit_score(double chamfer_value) {
    if (chamfer_value < 0.0) fail_usage("fit_score: negative distance");
    return std::exp(-chamfer_value);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) fail_usage("quantile: empty sample");
    if (p < 0.0 || p > 1.0) fail_usage("quantile: p outside [0, 1]");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * (double)(sorted.size() - 1);
    const std::size_t lo = (std::size_t)h;
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - (double)lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// ---- toy setup ----

ToySetup ToySetup::defaults() {
    ToySetup s;
    s.shapes = {default_shape("circle"), default_shape("ellipse"),
                default_shape("spiral")};
    s.banks = default_seed_banks();
    // Small on purpose: per-pair couplings must be memorized, and crossing
    // paths within a dataset put a floor under the velocity MSE that grows
    // quickly with the pair count.
    s.n_pairs = 16;
    s.grid_size = 3;
    return s;
}

void ToySetup::validate() const {
    if (shapes.empty()) fail_usage("toy setup: no shapes");
    banks.validate();
    if (n_pairs < 1 || grid_size < 2) fail_usage("toy setup: bad dataset sizes");
    std::size_t per = 0;
    for (const auto& shape : shapes) {
        shape.validate();
        auto it = banks.entries.find(shape.name());
        if (it == banks.entries.end())
            fail_usage("toy setup: no seed bank for " + shape.name());
        if (per == 0) per = it->second.size();
        if (it->second.size() != per)
            fail_usage("toy setup: seed banks must be the same length");
    }
}

int ToySetup::positions_per_shape() const {
    return (int)banks.entries.at(shapes.front().name()).size();
}

int ToySetup::emb_index(int shape_idx, int pos) const {
    return shape_idx * positions_per_shape() + pos;
}

const std::vector<uint64_t>& ToySetup::bank_of(int shape_idx) const {
    return banks.entries.at(shapes[(std::size_t)shape_idx].name());
}

int ToySetup::shape_index(const std::string& name) const {
    for (std::size_t i = 0; i < shapes.size(); ++i)
        if (shapes[i].name() == name) return (int)i;
    fail_usage("unknown shape: " + name);
}

std::vector<DatasetEntry> ToySetup::build_datasets() const {
    validate();
    std::vector<DatasetEntry> out;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        const auto& bank = bank_of((int)s);
        for (std::size_t p = 0; p < bank.size(); ++p) {
            DatasetEntry e;
            e.shape = shapes[s];
            e.seed = bank[p];
            e.emb_index = emb_index((int)s, (int)p);
            e.pairs = build_dataset(e.shape, e.seed, n_pairs, grid_size);
            out.push_back(std::move(e));
        }
    }
    return out;
}

Config ToySetup::to_config() const {
    Config c;
    c.set_int("toy.n_shapes", (int64_t)shapes.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const std::string pre = "toy.shape." + std::to_string(i) + ".";
        const ShapeSpec& s = shapes[i];
        c.set(pre + "kind", s.name());
        switch (s.kind) {
            case ShapeSpec::Kind::Circle:
                c.set(pre + "r", format_real(s.R));
                break;
            case ShapeSpec::Kind::Ellipse:
                c.set(pre + "a", format_real(s.A));
                c.set(pre + "b", format_real(s.B));
                break;
            case ShapeSpec::Kind::Spiral:
                c.set(pre + "growth", format_real(s.b));
                c.set(pre + "theta_min", format_real(s.theta_min));
                c.set(pre + "theta_max", format_real(s.theta_max));
                break;
        }
        std::string seeds;
        for (uint64_t v : banks.entries.at(s.name())) {
            if (!seeds.empty()) seeds += ",";
            seeds += std::to_string(v);
        }
        c.set("toy.bank." + std::to_string(i), seeds);
    }
    c.set_int("toy.n_pairs", n_pairs);
    c.set_int("toy.grid_size", grid_size);
    return c;
}

ToySetup ToySetup::from_config(const Config& c) {
    ToySetup s;
    const int n = (int)c.require_int("toy.n_shapes");
    if (n < 1) fail_usage("toy setup: n_shapes must be >= 1");
    for (int i = 0; i < n; ++i) {
        const std::string pre = "toy.shape." + std::to_string(i) + ".";
        const std::string kind = c.require_str(pre + "kind");
        ShapeSpec spec;
        if (kind == "circle") {
            spec = ShapeSpec::circle(c.require_real(pre + "r"));
        } else if (kind == "ellipse") {
            spec = ShapeSpec::ellipse(c.require_real(pre + "a"),
                                      c.require_real(pre + "b"));
        } else if (kind == "spiral") {
            spec = ShapeSpec::spiral(c.require_real(pre + "growth"),
                                     c.require_real(pre + "theta_min"),
                                     c.require_real(pre + "theta_max"));
        } else {
            fail_usage("toy setup: unknown shape kind " + kind);
        }
        s.shapes.push_back(spec);
        s.banks.entries[spec.name()] =
            c.get_u64_list("toy.bank." + std::to_string(i));
    }
    s.n_pairs = (int)c.require_int("toy.n_pairs");
    s.grid_size = (int)c.require_int("toy.grid_size");
    s.validate();
    return s;
}

// ---- set denoiser ----

std::vector<double> encode_condition(const ConditionVector& c) {
    return {c.onehot[0], c.onehot[1], c.onehot[2], c.params[0], c.params[1],
            c.params[2], (double)c.emb_index, c.t};
}

ConditionVector decode_condition(const std::vector<double>& enc) {
    if (enc.size() != 8) fail_usage("condition encoding must have 8 entries");
    ConditionVector c;
    c.onehot[0] = enc[0];
    c.onehot[1] = enc[1];
    c.onehot[2] = enc[2];
    c.params[0] = enc[3];
    c.params[1] = enc[4];
    c.params[2] = enc[5];
    c.emb_index = (int)std::llround(enc[6]);
    c.t = enc[7];
    return c;
}

Denoiser make_set_denoiser(const ModelParams& m) {
    // Borrows m: the caller keeps the model alive for the denoiser's lifetime.
    const ModelParams* pm = &m;
    Denoiser d;
    d.kind = Denoiser::Kind::VelocityFlow;
    d.reentrant = true;
    d.predict = [pm](const std::vector<double>& z, double t,
                     const std::vector<double>& cond, std::vector<double>& out) {
        if (z.empty() || z.size() % 2 != 0)
            fail_usage("set denoiser: latent must be a flattened 2D point set");
        ConditionVector c = decode_condition(cond);
        c.t = t;
        Batch batch;
        batch.reserve_rows((int)(z.size() / 2), pm->cfg);
        for (std::size_t i = 0; i + 1 < z.size(); i += 2) {
            const double x[2] = {z[i], z[i + 1]};
            batch.push(x, c, nullptr, pm->cfg);
        }
        ForwardCache cache;
        forward_batch(*pm, batch, cache, out);
    };
    return d;
}

std::vector<double> integrate_set(const ModelParams& m, const ConditionVector& cond,
                                  const std::vector<double>& z_set, int heun_steps) {
    const Denoiser den = make_set_denoiser(m);
    const std::vector<double> enc = encode_condition(cond);
    const double sign = (double)m.direction;
    VelocityFn f = [&](const std::vector<double>& z, double t, std::vector<double>& out) {
        den.predict(z, t, enc, out);
        if (sign < 0.0)
            for (double& v : out) v = -v;
    };
    return flow_map(f, z_set, 0.0, 1.0, heun_steps);
}

// ---- experiment ----

void ExperimentConfig::validate() const {
    if (points_per_sample < 1) fail_usage("experiment: points_per_sample must be >= 1");
    if (repeats < 1) fail_usage("experiment: repeats must be >= 1");
    if (n_erase < 1) fail_usage("experiment: n_erase must be >= 1");
    if (tpw_k < 1) fail_usage("experiment: tpw_k must be >= 1");
    if (delta < 0.0) fail_usage("experiment: delta must be >= 0");
    if (heun_steps < 1) fail_usage("experiment: heun_steps must be >= 1");
    if (curve_points < 4) fail_usage("experiment: curve_points must be >= 4");
}

const ProtocolStats* ExperimentReport::find(const std::string& name) const {
    for (const ProtocolStats* p : {&matched, &mismatched, &erased, &injected})
        if (p->name == name) return p;
    return nullptr;
}

static NoiseTensor x0_stream(uint64_t dataset_seed, int n_points) {
    return sample_gaussian(derive_seed(dataset_seed, kStreamDatasetX0),
                           {(std::size_t)n_points, 2});
}

static void finalize_stats(ProtocolStats& st) {
    std::vector<double> sorted = st.chamfer_values;
    std::sort(sorted.begin(), sorted.end());
    st.median = quantile_sorted(sorted, 0.5);
    st.q25 = quantile_sorted(sorted, 0.25);
    st.q75 = quantile_sorted(sorted, 0.75);
    st.iqr = st.q75 - st.q25;
}

ExperimentReport run_experiment(const Checkpoint& ckpt, const ToySetup& setup,
                                int target_shape, const ExperimentConfig& cfg) {
    cfg.validate();
    setup.validate();
    if (target_shape < 0 || target_shape >= (int)setup.shapes.size())
        fail_usage("experiment: target shape index out of range");
    const int n_shapes = (int)setup.shapes.size();
    const int P = setup.positions_per_shape();
    if (n_shapes * P != ckpt.model.cfg.n_embeddings)
        fail_usage("experiment: checkpoint embedding table does not match the setup");
    if (n_shapes < 2) fail_usage("experiment: needs at least two shapes to mismatch");

    ExperimentReport rep;
    rep.shape = setup.shapes[(std::size_t)target_shape].name();
    rep.repeats = cfg.repeats;
    rep.checkpoint_loss =
        ckpt.meta.get_real("train.final_loss", std::numeric_limits<double>::quiet_NaN());
    const double thr = ckpt.meta.get_real("train.overfit_threshold", 1e-3);
    rep.untrained_warning =
        !(rep.checkpoint_loss == rep.checkpoint_loss) || rep.checkpoint_loss > thr;
    rep.matched.name = "matched";
    rep.mismatched.name = "mismatched";
    rep.erased.name = "erased";
    rep.injected.name = "injected";

    const ShapeSpec& A = setup.shapes[(std::size_t)target_shape];
    const ReferenceCurve ref = reference_curve(A, cfg.curve_points);
    const int M = cfg.points_per_sample;

    // entries of the non-target shapes in a fixed order, for erasure sources
    std::vector<std::pair<int, int>> pool;  // (shape_idx, pos)
    for (int d = 1; d < n_shapes; ++d) {
        const int s = (target_shape + d) % n_shapes;
        for (int p = 0; p < P; ++p) pool.emplace_back(s, p);
    }

    const WeightSchedule ws =
        power_weights(uniform_times(0.0, 1.0, cfg.tpw_k), cfg.center);
    const Denoiser den = make_set_denoiser(ckpt.model);

    auto evaluate = [&](const std::vector<double>& z, const ConditionVector& cond,
                        ProtocolStats& st) {
        const std::vector<double> pts =
            integrate_set(ckpt.model, cond, z, cfg.heun_steps);
        const double ch = chamfer(pts, ref.pts);
        st.chamfer_values.push_back(ch);
        st.fit_values.push_back(fit_score(ch));
    };

    for (int r = 0; r < cfg.repeats; ++r) {
        // offset the cycles against each other so no two repeats r < 20 share
        // a full (target entry, mismatch entry, erase set) configuration
        const int p = (r + r / P) % P;
        const int combo = r % (2 * P);
        const int other = (target_shape + 1 + combo % 2) % n_shapes;
        const int q = combo / 2;
        const int erase_off = (r + r / P) % (int)pool.size();

        // matched: the target entry's own condition and x0 stream
        const NoiseTensor z_m = x0_stream(setup.bank_of(target_shape)[(std::size_t)p], M);
        const ConditionVector cond_m =
            make_condition(A, setup.emb_index(target_shape, p), 0.0);
        evaluate(z_m.data, cond_m, rep.matched);

        // mismatched: target shape condition, foreign embedding and noise
        const NoiseTensor z_mm = x0_stream(setup.bank_of(other)[(std::size_t)q], M);
        const ConditionVector cond_mm = make_condition(A, setup.emb_index(other, q), 0.0);
        evaluate(z_mm.data, cond_mm, rep.mismatched);

        // erased: average n_erase foreign entries' streams
        std::vector<NoiseTensor> sources;
        sources.reserve((std::size_t)cfg.n_erase);
        for (int i = 0; i < cfg.n_erase; ++i) {
            const auto& [s, pp] = pool[(std::size_t)((erase_off + i) % (int)pool.size())];
            sources.push_back(x0_stream(setup.bank_of(s)[(std::size_t)pp], M));
        }
        const NoiseTensor z_er = erase(sources);
        evaluate(z_er.data, cond_mm, rep.erased);

        // injected: adjust the mismatched noise with the model's own
        // aggregated velocity under the same condition
        const std::vector<double> v_agg =
            tpw_velocity(den, z_mm.data, encode_condition(cond_mm), ws);
        const std::vector<double> z_inj = blend_velocity(z_mm.data, v_agg, cfg.delta);
        evaluate(z_inj, cond_mm, rep.injected);
    }

    finalize_stats(rep.matched);
    finalize_stats(rep.mismatched);
    finalize_stats(rep.erased);
    finalize_stats(rep.injected);
    return rep;
}

std::string experiment_csv(const ExperimentReport& rep) {
    std::ostringstream out;
    csv_row(out, {"condition", "repeat", "chamfer", "fit"});
    for (const ProtocolStats* st :
         {&rep.matched, &rep.mismatched, &rep.erased, &rep.injected}) {
        for (std::size_t r = 0; r < st->chamfer_values.size(); ++r)
            csv_row(out, {st->name, std::to_string(r),
                          format_real(st->chamfer_values[r]),
                          format_real(st->fit_values[r])});
    }
    return out.str();
}

std::string experiment_summary_json(const std::vector<ExperimentReport>& reports) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& rep : reports) {
        nlohmann::json j;
        j["shape"] = rep.shape;
        j["repeats"] = rep.repeats;
        j["untrained_warning"] = rep.untrained_warning;
        if (rep.checkpoint_loss == rep.checkpoint_loss)
            j["checkpoint_loss"] = rep.checkpoint_loss;
        for (const ProtocolStats* st :
             {&rep.matched, &rep.mismatched, &rep.erased, &rep.injected}) {
            nlohmann::json s;
            s["median_chamfer"] = st->median;
            s["q25"] = st->q25;
            s["q75"] = st->q75;
            s["iqr"] = st->iqr;
            s["median_fit"] = st->fit_values.empty()
                                  ? 0.0
                                  : [st] {
                                        std::vector<double> f = st->fit_values;
                                        std::sort(f.begin(), f.end());
                                        return quantile_sorted(f, 0.5);
                                    }();
            j["protocols"][st->name] = s;
        }
        root.push_back(j);
    }
    return root.dump(2) + "\n";
}

}  // namespace noiseshape
