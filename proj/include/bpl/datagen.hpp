#pragma once
#include <cstdint>

#include "bpl/dense.hpp"
#include "bpl/lasso.hpp"

namespace bpl {

struct LassoData {
    LassoInstance instance;
    Vector x_true;
};

// A ~ N(0,1) i.i.d., x* with `sparsity` standard-normal nonzeros at uniform
// positions, b = A x* + N(0, noise_sigma^2) noise. Pure function of the seed.
LassoData gen_lasso(int m, int n, int sparsity, double noise_sigma, std::uint64_t seed,
                    double lambda = 1.0);

// Procedural swimmer images: a fixed torso plus n_limbs limbs, each in one of
// n_limb_positions positions (45-degree steps from each limb's outward
// direction). All limb masks are pairwise disjoint across limbs and disjoint
// from the torso, so every image is binary {0, intensity}.
// Defaults give torso and limb masks of comparable pixel mass (12 vs 8),
// which keeps the factorization landscape genuinely multi-modal the way the
// original dataset is; a dominant torso makes every run trivially succeed.
struct SwimmerSpec {
    int image_side = 32;
    int n_limb_positions = 4;
    int n_limbs = 4;  // fixed anchor layout supports exactly 4
    int torso_col = 15;
    int torso_width = 1;
    int torso_row = 10;
    int torso_len = 12;
    int limb_len = 8;
    double intensity = 1.0;
};

struct SwimmerData {
    Matrix M;          // side^2 x positions^limbs, one vectorized image per column
    Matrix X_witness;  // side^2 x (1 + limbs*positions): torso plus each limb mask
    Matrix Y_witness;  // 0/1 mixing weights; M == X_witness * Y_witness^T exactly
};

SwimmerData gen_swimmer(const SwimmerSpec& spec = {});

struct NtdData {
    DenseTensor tensor;
    DenseTensor core;
    std::vector<Matrix> factors;
};

// Nonnegative core and factors with |N(0,1)| entries, tensor assembled from them.
NtdData gen_random_ntd(const std::vector<int>& dims, const std::vector<int>& core_dims,
                       std::uint64_t seed);

}  // namespace bpl
