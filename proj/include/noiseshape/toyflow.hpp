#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "noiseshape/noise.hpp"

namespace noiseshape {

// Parametric 2D target shapes. Parameters are chosen so every curve lives at
// roughly the unit scale of the Gaussian prior.
struct ShapeSpec {
    enum class Kind { Circle, Ellipse, Spiral };
    Kind kind = Kind::Circle;
    double R = 1.0;                            // circle radius
    double A = 1.5, B = 0.75;                  // ellipse semi-axes, A >= B
    double b = 0.08;                           // spiral growth rate, r = b * theta
    double theta_min = 0.0, theta_max = 0.0;   // spiral angle range

    static ShapeSpec circle(double R);
    static ShapeSpec ellipse(double A, double B);
    static ShapeSpec spiral(double b, double theta_min, double theta_max);

    void validate() const;
    std::string name() const;  // "circle" | "ellipse" | "spiral"

    // Point at curve parameter u in [0, 1): angle sweep for circle/ellipse,
    // linear theta for the spiral.
    void point_at(double u, double out[2]) const;
};

ShapeSpec default_shape(const std::string& name);  // R=1; A=1.5,B=0.75; b=0.08, theta 0..6pi

// One supervised pair: straight path x(t) = (1-t) x0 + t x1 with constant
// velocity x1 - x0, sampled on an open uniform grid.
struct TrainingPair {
    double x0[2];
    double x1[2];
    std::vector<double> t_grid;  // strictly increasing, inside (0, 1)
};

struct ReferenceCurve {
    std::vector<double> pts;  // flattened (x, y) pairs
    std::size_t count() const { return pts.size() / 2; }
};

ReferenceCurve reference_curve(const ShapeSpec& shape, int n_points);  // n_points >= 4

// x_out = (1-t) x0 + t x1, v_out = x1 - x0. t must lie in [0, 1].
void interpolant(const TrainingPair& pair, double t, double x_out[2], double v_out[2]);

// Deterministic for fixed inputs. x0 ~ N(0, I2) from one derived substream of
// `seed`, x1 from uniform curve-parameter draws on a second substream; keeping
// the substreams separate lets generation re-draw the exact training x0 set.
// t_grid is j/(grid_size+1) for j = 1..grid_size, shared by all pairs.
std::vector<TrainingPair> build_dataset(const ShapeSpec& shape, uint64_t seed,
                                        int n_pairs, int grid_size);

std::vector<double> open_uniform_grid(int grid_size);

SeedBank default_seed_banks();

// Columns: pair_id,t,x0_x,x0_y,x1_x,x1_y (one row per pair per grid time).
void dataset_to_csv(const std::vector<TrainingPair>& pairs, std::ostream& out);

}  // namespace noiseshape
