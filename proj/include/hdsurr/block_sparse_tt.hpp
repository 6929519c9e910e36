#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"
#include "hdsurr/tensor_train.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hdsurr {

/// Polynomial class of a block-sparse train: total degree ≤ max_degree (or
/// = max_degree when homogeneous), active variables spanning at most
/// `locality` consecutive modes.
struct DegreeProfile {
    int max_degree = 2;
    std::optional<int> locality;
    bool homogeneous = false;
    std::optional<int> max_block_size;  ///< optional cap on every ρ
};

/// State carried across a bond: accumulated degree and, with locality, the
/// number of modes since the first active one (0 = none yet, K+1 = closed).
struct BondLabel {
    int degree = 0;
    int age = 0;
    bool operator==(const BondLabel&) const = default;
};

struct BlockTransition {
    int from;   ///< label index on the left bond
    int slice;  ///< basis index = polynomial degree
    int to;     ///< label index on the right bond
};

/// Block structure of every core. Bond k sits left of core k; bond 0 and bond
/// d are the unit boundaries. Rows of core k are grouped by the labels of
/// bond k, columns by those of bond k+1.
struct BlockPattern {
    std::vector<int> mode_sizes;
    std::vector<std::vector<BondLabel>> labels;       ///< per bond
    std::vector<std::vector<int>> sizes;              ///< ρ per bond and label
    std::vector<std::vector<int>> offsets;            ///< first row of each block
    std::vector<std::vector<BlockTransition>> transitions;  ///< per core

    int dim() const { return static_cast<int>(mode_sizes.size()); }
    int rank(int bond) const;
    /// Rank tuple (r₁,…,r_{d−1}).
    std::vector<int> ranks() const;
    /// Entry (a,i,b) of core k may be nonzero.
    bool allows(int core, int a, int i, int b) const;
    /// 0/1 mask with the core's shape.
    TTCore mask(int core) const;
    long free_parameters() const;
    /// Number of basis multi-indices representable through the pattern.
    double admissible_multi_indices() const;
};

BlockPattern block_structure(std::span<const BasisSpec> bases, const DegreeProfile& profile);

struct BlockALSConfig {
    double stop_tol = 1e-11;  ///< relative residual improvement per sweep
    int max_iters = 50;       ///< back-and-forth sweeps
    std::uint64_t seed = 0;
};

struct BlockSparseFit {
    FunctionalTT surrogate;
    FitStats stats;
    BlockPattern pattern;
    std::vector<double> micro_residuals;  ///< training MSE after every micro-step
    long rounded_dofs = 0;                ///< tt_dofs after tt_round(·, 1e-12)
};

/// Alternating least squares restricted to the block pattern on scattered data.
BlockSparseFit bs_als_fit(const Dataset& data, std::vector<BasisSpec> bases,
                          const DegreeProfile& profile, const BlockALSConfig& config = {});

}  // namespace hdsurr
