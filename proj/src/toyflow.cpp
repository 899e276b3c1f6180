#include "noiseshape/toyflow.hpp"

#include <cmath>

#include "noiseshape/config.hpp"
#include "noiseshape/csvio.hpp"
#include "noiseshape/errors.hpp"
#include "noiseshape/rng.hpp"

namespace noiseshape {

static constexpr double kTwoPi = 6.283185307179586476925286766559;

ShapeSpec ShapeSpec::circle(double R) {
    ShapeSpec s;
    s.kind = Kind::Circle;
    s.R = R;
    s.validate();
    return s;
}

ShapeSpec ShapeSpec::ellipse(double A, double B) {
    ShapeSpec s;
    s.kind = Kind::Ellipse;
    s.A = A;
    s.B = B;
    s.validate();
    return s;
}

ShapeSpec ShapeSpec::spiral(double b, double theta_min, double theta_max) {
    ShapeSpec s;
    s.kind = Kind::Spiral;
    s.b = b;
    s.theta_min = theta_min;
    s.theta_max = theta_max;
    s.validate();
    return s;
}

void ShapeSpec::validate() const {
    switch (kind) {
        case Kind::Circle:
            if (!(R > 0.0)) fail_usage("circle: R must be positive");
            break;
        case Kind::Ellipse:
            if (!(B > 0.0) || !(A >= B)) fail_usage("ellipse: need A >= B > 0");
            break;
        case Kind::Spiral:
            if (!(b > 0.0)) fail_usage("spiral: b must be positive");
            if (!(theta_min < theta_max)) fail_usage("spiral: need theta_min < theta_max");
            break;
    }
}

std::string ShapeSpec::name() const {
    switch (kind) {
        case Kind::Circle: return "circle";
        case Kind::Ellipse: return "ellipse";
        case Kind::Spiral: return "spiral";
    }
    return "?";
}

void ShapeSpec::point_at(double u, double out[2]) const {
    switch (kind) {
        case Kind::Circle: {
            const double th = kTwoPi * u;
            out[0] = R * std::cos(th);
            out[1] = R * std::sin(th);
            break;
        }
        case Kind::Ellipse: {
            const double th = kTwoPi * u;
            out[0] = A * std::cos(th);
            out[1] = B * std::sin(th);
            break;
        }
        case Kind::Spiral: {
            const double th = theta_min + (theta_max - theta_min) * u;
            const double r = b * th;  // Archimedean
            out[0] = r * std::cos(th);
            out[1] = r * std::sin(th);
            break;
        }
    }
}

ShapeSpec default_shape(const std::string& name) {
    if (name == "circle") return ShapeSpec::circle(1.0);
    if (name == "ellipse") return ShapeSpec::ellipse(1.5, 0.75);
    if (name == "spiral") return ShapeSpec::spiral(0.08, 0.0, 3.0 * kTwoPi);
    fail_usage("unknown shape: " + name + " (expected circle, ellipse or spiral)");
}

ReferenceCurve reference_curve(const ShapeSpec& shape, int n_points) {
    shape.validate();
    if (n_points < 4) fail_usage("reference_curve: need n_points >= 4");
    ReferenceCurve curve;
    curve.pts.resize((std::size_t)n_points * 2);
    const bool closed = shape.kind != ShapeSpec::Kind::Spiral;
    for (int i = 0; i < n_points; ++i) {
        // Closed curves wrap, so the endpoint is excluded; the open spiral
        // includes both ends.
        const double u = closed ? (double)i / n_points
                                : (double)i / (n_points - 1);
        shape.point_at(u, &curve.pts[(std::size_t)i * 2]);
    }
    return curve;
}

void interpolant(const TrainingPair& pair, double t, double x_out[2], double v_out[2]) {
    if (!(t >= 0.0 && t <= 1.0)) fail_usage("interpolant: t outside [0, 1]");
    for (int j = 0; j < 2; ++j) {
        x_out[j] = (1.0 - t) * pair.x0[j] + t * pair.x1[j];
        v_out[j] = pair.x1[j] - pair.x0[j];
    }
}

std::vector<double> open_uniform_grid(int grid_size) {
    if (grid_size < 2) fail_usage("grid_size must be >= 2");
    std::vector<double> grid(grid_size);
    for (int j = 1; j <= grid_size; ++j)
        grid[j - 1] = (double)j / (double)(grid_size + 1);
    return grid;
}

std::vector<TrainingPair> build_dataset(const ShapeSpec& shape, uint64_t seed,
                                        int n_pairs, int grid_size) {
    shape.validate();
    if (n_pairs < 1) fail_usage("build_dataset: need n_pairs >= 1");
    const std::vector<double> grid = open_uniform_grid(grid_size);

    GaussianRng x0_rng(derive_seed(seed, kStreamDatasetX0));
    GaussianRng x1_rng(derive_seed(seed, kStreamDatasetX1));

    std::vector<TrainingPair> pairs(n_pairs);
    for (int i = 0; i < n_pairs; ++i) {
        TrainingPair& p = pairs[i];
        p.x0[0] = x0_rng.normal();
        p.x0[1] = x0_rng.normal();
        // Uniform in curve parameter (not arc length); uniform01 is (0, 1],
        // folded to [0, 1) so closed curves do not duplicate their seam.
        double u = x1_rng.uniform01();
        if (u == 1.0) u = 0.0;
        shape.point_at(u, p.x1);
        p.t_grid = grid;
    }
    return pairs;
}

SeedBank default_seed_banks() {
    SeedBank bank;
    bank.entries["circle"] = {101, 103, 104, 105, 106, 107};
    bank.entries["ellipse"] = {201, 211, 212, 213, 214, 215};
    bank.entries["spiral"] = {301, 313, 314, 315, 316, 317};
    bank.validate();
    return bank;
}

void dataset_to_csv(const std::vector<TrainingPair>& pairs, std::ostream& out) {
    csv_row(out, {"pair_id", "t", "x0_x", "x0_y", "x1_x", "x1_y"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const TrainingPair& p = pairs[i];
        for (double t : p.t_grid) {
            csv_row(out, {std::to_string(i), format_real(t), format_real(p.x0[0]),
                          format_real(p.x0[1]), format_real(p.x1[0]),
                          format_real(p.x1[1])});
        }
    }
}

}  // namespace noiseshape
