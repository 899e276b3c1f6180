#include "noiseshape/tensor.hpp"

#include <cmath>

#include "noiseshape/errors.hpp"

namespace noiseshape {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    if (shape.empty()) fail_usage("invalid shape: no dimensions");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) fail_usage("invalid shape: zero dimension");
        n *= d;
    }
    return n;
}

NoiseTensor::NoiseTensor(std::vector<double> d, std::vector<std::size_t> s)
    : data(std::move(d)), shape(std::move(s)) {
    if (shape_numel(shape) != data.size())
        fail_usage("invalid shape: product(shape) != data length");
}

NoiseTensor NoiseTensor::zeros(const std::vector<std::size_t>& shape) {
    NoiseTensor t;
    t.shape = shape;
    t.data.assign(shape_numel(shape), 0.0);
    return t;
}

void ensure_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) fail_numeric(std::string("non-finite value in ") + what);
    }
}

void ensure_finite(const NoiseTensor& t, const char* what) {
    ensure_finite(t.data, what);
}

}  // namespace noiseshape
