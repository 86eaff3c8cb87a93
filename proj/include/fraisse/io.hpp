#pragma once

// File formats. Rationals are [numerator, denominator] integer pairs; integers
// beyond 64 bits are written as decimal strings and read back from either form.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fraisse/fraisse_builder.hpp"
#include "fraisse/gaussian_field.hpp"
#include "fraisse/linear_orders.hpp"
#include "fraisse/metric_core.hpp"

namespace fraisse::io {

using json = nlohmann::json;

json rational_to_json(const Rational& q);
Rational rational_from_json(const json& j);

/// {"labels": [...], "sq_dist": [[[p,q], ...], ...]}. A flat row-major list of
/// n*n pairs is also accepted on input.
json space_to_json(const SpaceDistances& space);
SpaceDistances space_from_json(const json& j);

SpaceDistances read_space_file(const std::filesystem::path& path);

/// Shape-checked labels and matrix without the (0,4) range check.
struct DistanceFile {
  std::vector<std::string> labels;
  RationalMatrix sq_dist;
};
DistanceFile distance_file_from_json(const json& j);
DistanceFile read_distance_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

json certificate_to_json(const Certification& cert);
json coords_to_json(const Eigen::MatrixXd& coords);
json estimate_to_json(const Estimate& e);
json mixing_to_json(const MixingReport& rep);
std::string mixing_csv(const MixingReport& rep);
json orders_to_json(const OrderDistribution& dist);
std::string samples_csv(const SpaceDistances& space, const SampleMatrix& draws);

std::string sha256_hex(std::string_view bytes);

/// SHA-256 of the canonical space JSON.
std::string space_hash(const SpaceDistances& space);

/// Canonical text of a JSON value (sorted keys, 2-space indent).
std::string canonical(const json& j);

/// Stage files stage_000.json ... plus manifest.json with seed, snapping
/// parameters and per-stage hashes of the space content. Keys of
/// `provenance` are copied into every file written.
json write_chain(const std::filesystem::path& dir, const GenericChain& chain,
                 const json& provenance = nullptr);

}  // namespace fraisse::io
