#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace noiseshape {

// Flat real-valued array with an explicit shape. Invariant: product(shape) == data.size()
// and every entry finite. Validation happens at construction and at module boundaries,
// not inside hot loops.
struct NoiseTensor {
    std::vector<double> data;
    std::vector<std::size_t> shape;

    NoiseTensor() = default;
    NoiseTensor(std::vector<double> d, std::vector<std::size_t> s);

    std::size_t size() const { return data.size(); }
    bool same_shape(const NoiseTensor& other) const { return shape == other.shape; }

    static NoiseTensor zeros(const std::vector<std::size_t>& shape);
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);  // rejects empty/zero dims
void ensure_finite(const NoiseTensor& t, const char* what);
void ensure_finite(const std::vector<double>& v, const char* what);

}  // namespace noiseshape
