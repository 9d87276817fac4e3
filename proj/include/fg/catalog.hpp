#pragma once

#include <vector>

#include <json.hpp>

#include "fg/rng.hpp"
#include "fg/sim.hpp"

namespace fg {

// Deterministic-under-seed training catalog. The first four entries are the
// fixed "seen" evaluation objects (identical parameters), the remainder is
// drawn from a household-object name pool, alternating delicate and robust
// strata. Throws on n == 0.
std::vector<ObjectSpec> sample_object_catalog(size_t n, Rng& rng);

// Fixed 10-object evaluation set: 4 seen (present in the training catalog)
// and 6 unseen.
std::vector<ObjectSpec> eval_catalog();

// Delicate stratum: crushes below 3 N.
bool is_delicate(const ObjectSpec& spec);

// Used by generation manifests; round-trips every field.
nlohmann::json object_spec_to_json(const ObjectSpec& spec);
ObjectSpec object_spec_from_json(const nlohmann::json& j);

}  // namespace fg
