#pragma once

// Finite approximations of the limit structure: strong (free) amalgamation,
// generic one-point growth, and instance witnesses for the extension property,
// transitivity and no-algebraicity.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fraisse/metric_core.hpp"
#include "fraisse/rng.hpp"
#include "fraisse/snapping.hpp"

namespace fraisse {

struct AmalgamProblem {
  SpaceDistances left;
  SpaceDistances right;
  std::vector<std::size_t> common_left;
  std::vector<std::size_t> common_right;
};

struct Amalgam {
  SpaceDistances space;                 // left points first, then right-only points
  std::vector<std::size_t> left_map;    // left index -> amalgam index (identity)
  std::vector<std::size_t> right_map;   // right index -> amalgam index
  GramMatrix certificate;
};

/// Free amalgam over the common part: residuals of the left-only and the
/// right-only points are placed in orthogonal complements of span(A), so every
/// cross inner product equals that of the projections onto span(A).
Amalgam amalgamate(const AmalgamProblem& p);

/// Appends k points drawn uniformly from the unit sphere of R^{n+k} with the
/// existing points embedded in the first n coordinates.
SpaceDistances random_extension(const SpaceDistances& space, std::size_t k, CounterRng& rng,
                                const SnapPolicy& policy = {});

struct ExtensionWitness {
  SpaceDistances extended;
  std::size_t index = 0;  // position of the new point
  GramMatrix certificate;
};

/// Thrown when a prescribed 1-type is not realizable; carries the pivot witness.
class UnrealizableType : public Error {
 public:
  UnrealizableType(const std::string& what, Rejection witness)
      : Error(what), witness_(std::move(witness)) {}
  const Rejection& witness() const { return witness_; }

 private:
  Rejection witness_;
};

/// Adds one point with exactly the prescribed squared distances. d^2 = 0 is
/// accepted here and rejected through the PD check (coincident points).
ExtensionWitness one_point_extension_witness(const SpaceDistances& space,
                                             std::span<const Rational> target_dists);

/// Single-point map a -> b; every singleton is isometric to every other.
PartialIsometry check_transitivity_witness(std::size_t a_idx, std::size_t b_idx,
                                           const SpaceDistances& space);
PartialIsometry check_transitivity_witness(std::size_t a_idx, const SpaceDistances& a_space,
                                           std::size_t b_idx, const SpaceDistances& b_space);

struct AlgebraicityWitness {
  SpaceDistances extended;       // space + one new point
  std::size_t index = 0;
  GramMatrix certificate;
  Rational sq_dist_to_x;         // > 0
};

/// m extensions, each adding a point with x's distances to `fixed` but distinct from x.
std::vector<AlgebraicityWitness> no_algebraicity_witnesses(const SpaceDistances& space,
                                                           std::span<const std::size_t> fixed,
                                                           std::size_t x_idx, std::size_t m,
                                                           CounterRng& rng,
                                                           const SnapPolicy& policy = {});

struct ExtensionRecord {
  std::size_t stage = 0;
  std::size_t points_added = 0;
  std::uint64_t rng_position = 0;
  unsigned denom_bits = 0;
};

struct GenericChain {
  std::vector<SpaceDistances> stages;
  std::uint64_t seed = 0;
  SnapPolicy policy;
  std::vector<ExtensionRecord> log;
};

/// stages[0] = start, stages[i+1] = random_extension(stages[i], per_stage).
GenericChain grow_chain(const SpaceDistances& start, std::size_t stage_count, std::size_t per_stage,
                        std::uint64_t seed, const SnapPolicy& policy = {});

/// True iff every stage is certified and an exact principal block of the next.
bool chain_is_coherent(const GenericChain& chain);

}  // namespace fraisse
