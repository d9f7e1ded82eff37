#include "bpl/datagen.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "bpl/errors.hpp"
#include "bpl/ntd.hpp"
#include "bpl/rng.hpp"

namespace bpl {

LassoData gen_lasso(int m, int n, int sparsity, double noise_sigma, std::uint64_t seed,
                    double lambda) {
    if (m < 1 || n < 1) throw std::invalid_argument("gen_lasso: m and n must be positive");
    if (sparsity < 0 || sparsity > n) throw std::invalid_argument("gen_lasso: sparsity must be in [0, n]");
    if (noise_sigma < 0.0) throw std::invalid_argument("gen_lasso: noise_sigma must be >= 0");
    Rng rng(seed);

    // draw order is part of the format: A column-major, then support, then
    // nonzero values, then noise
    Matrix A(m, n);
    for (Eigen::Index t = 0; t < A.size(); ++t) A.data()[t] = rng.next_normal();

    Vector x_true = Vector::Zero(n);
    std::vector<int> pos(n);
    for (int j = 0; j < n; ++j) pos[j] = j;
    rng.shuffle(pos);
    for (int k = 0; k < sparsity; ++k) x_true[pos[k]] = rng.next_normal();

    Vector b = A * x_true;
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += noise_sigma * rng.next_normal();

    return {LassoInstance::make(std::move(A), std::move(b), lambda), std::move(x_true)};
}

namespace {

using PixelSet = std::set<std::pair<int, int>>;

// limb anchors sit just outside the torso corners; positions sweep away from
// the torso in 45-degree steps
struct LimbLayout {
    int ax, ay;              // anchor pixel
    int dirs[4][2];          // position -> unit direction
};

PixelSet limb_pixels(const LimbLayout& limb, int position, int len) {
    PixelSet px;
    for (int t = 0; t < len; ++t)
        px.insert({limb.ax + t * limb.dirs[position][0], limb.ay + t * limb.dirs[position][1]});
    return px;
}

void check_in_frame(const PixelSet& px, int side) {
    for (auto [x, y] : px)
        if (x < 0 || x >= side || y < 0 || y >= side)
            throw std::invalid_argument("gen_swimmer: geometry out of frame");
}

bool disjoint(const PixelSet& a, const PixelSet& b) {
    for (const auto& p : a)
        if (b.count(p)) return false;
    return true;
}

Vector rasterize(const PixelSet& px, int side, double intensity) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(side) * side);
    for (auto [x, y] : px) v[x + side * y] = intensity;
    return v;
}

}  // namespace

SwimmerData gen_swimmer(const SwimmerSpec& spec) {
    if (spec.n_limbs != 4) throw std::invalid_argument("gen_swimmer: layout needs n_limbs == 4");
    if (spec.n_limb_positions != 4)
        throw std::invalid_argument("gen_swimmer: layout needs n_limb_positions == 4");
    if (spec.intensity <= 0.0) throw std::invalid_argument("gen_swimmer: intensity must be > 0");
    const int side = spec.image_side;

    PixelSet torso;
    for (int dx = 0; dx < spec.torso_width; ++dx)
        for (int dy = 0; dy < spec.torso_len; ++dy)
            torso.insert({spec.torso_col + dx, spec.torso_row + dy});
    check_in_frame(torso, side);

    const int left = spec.torso_col - 1;
    const int right = spec.torso_col + spec.torso_width;
    const int top = spec.torso_row;
    const int bottom = spec.torso_row + spec.torso_len - 1;
    const LimbLayout layouts[4] = {
        {left, top, {{-1, 0}, {-1, -1}, {0, -1}, {-1, 1}}},      // upper left
        {right, top, {{1, 0}, {1, -1}, {0, -1}, {1, 1}}},        // upper right
        {left, bottom, {{-1, 0}, {-1, 1}, {0, 1}, {-1, -1}}},    // lower left
        {right, bottom, {{1, 0}, {1, 1}, {0, 1}, {1, -1}}},      // lower right
    };

    std::vector<std::vector<PixelSet>> limbs(4);
    for (int l = 0; l < 4; ++l) {
        limbs[l].resize(4);
        for (int p = 0; p < 4; ++p) {
            limbs[l][p] = limb_pixels(layouts[l], p, spec.limb_len);
            check_in_frame(limbs[l][p], side);
            if (!disjoint(limbs[l][p], torso))
                throw std::invalid_argument("gen_swimmer: limb overlaps the torso");
        }
    }
    for (int l = 0; l < 4; ++l)
        for (int l2 = l + 1; l2 < 4; ++l2)
            for (int p = 0; p < 4; ++p)
                for (int p2 = 0; p2 < 4; ++p2)
                    if (!disjoint(limbs[l][p], limbs[l2][p2]))
                        throw std::invalid_argument("gen_swimmer: limbs overlap");

    const int n_pixels = side * side;
    const int n_parts = 1 + 16;
    const int n_images = 256;  // 4^4 position combinations
    SwimmerData data;
    data.X_witness.resize(n_pixels, n_parts);
    data.X_witness.col(0) = rasterize(torso, side, spec.intensity);
    for (int l = 0; l < 4; ++l)
        for (int p = 0; p < 4; ++p)
            data.X_witness.col(1 + 4 * l + p) = rasterize(limbs[l][p], side, spec.intensity);

    data.Y_witness = Matrix::Zero(n_images, n_parts);
    for (int img = 0; img < n_images; ++img) {
        data.Y_witness(img, 0) = 1.0;
        for (int l = 0; l < 4; ++l) {
            const int p = (img >> (2 * l)) & 3;
            data.Y_witness(img, 1 + 4 * l + p) = 1.0;
        }
    }
    data.M = data.X_witness * data.Y_witness.transpose();
    return data;
}

NtdData gen_random_ntd(const std::vector<int>& dims, const std::vector<int>& core_dims,
                       std::uint64_t seed) {
    if (dims.size() != core_dims.size())
        throw std::invalid_argument("gen_random_ntd: dims order mismatch");
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (core_dims[i] > dims[i])
            throw std::invalid_argument("gen_random_ntd: core dims must not exceed tensor dims");
    Rng rng(seed);
    NtdData data;
    data.core = DenseTensor(core_dims);
    for (std::int64_t t = 0; t < data.core.size(); ++t)
        data.core.data()[t] = std::abs(rng.next_normal());
    data.factors.resize(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
        data.factors[i].resize(dims[i], core_dims[i]);
        for (Eigen::Index t = 0; t < data.factors[i].size(); ++t)
            data.factors[i].data()[t] = std::abs(rng.next_normal());
    }
    data.tensor = ntd_assemble(data.core, data.factors);
    return data;
}

}  // namespace bpl
