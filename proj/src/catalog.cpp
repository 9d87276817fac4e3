#include "fg/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fg {

bool is_delicate(const ObjectSpec& spec) { return spec.crush_force_n < 3.0; }

static ObjectSpec seen_spec(const char* name, double rest, double mass, double mu, double k,
                            double crush, double yield, double plast) {
  ObjectSpec s;
  s.name = name;
  s.rest_width_mm = rest;
  s.mass_kg = mass;
  s.friction_mu = mu;
  s.stiffness_n_per_mm = k;
  s.crush_force_n = crush;
  s.yield_force_n = yield;
  s.plasticity = plast;
  s.seen = true;
  return s;
}

// The four evaluation objects that also appear in every training catalog.
static std::vector<ObjectSpec> seen_eval_objects() {
  return {
      seen_spec("empty paper cup", 64.0, 0.010, 0.50, 0.25, 4.0, 1.2, 0.55),
      seen_spec("raspberry", 20.0, 0.008, 0.70, 0.08, 1.6, 0.50, 0.50),
      seen_spec("tomato", 55.0, 0.120, 0.60, 0.12, 2.6, 0.90, 0.25),
      seen_spec("paper cup with water", 64.0, 0.150, 0.30, 0.40, 6.0, 3.5, 0.50),
  };
}

std::vector<ObjectSpec> eval_catalog() {
  std::vector<ObjectSpec> cat = seen_eval_objects();
  auto unseen = [](const char* name, double rest, double mass, double mu, double k, double crush,
                   double yield, double plast) {
    ObjectSpec s = seen_spec(name, rest, mass, mu, k, crush, yield, plast);
    s.seen = false;
    return s;
  };
  cat.push_back(unseen("blackberry", 24.0, 0.006, 0.65, 0.07, 1.5, 0.45, 0.55));
  cat.push_back(unseen("egg", 44.0, 0.055, 0.45, 1.50, 2.4, 2.4, 0.0));
  cat.push_back(unseen("empty metal can", 52.0, 0.015, 0.50, 2.50, 9.0, 6.0, 0.9));
  cat.push_back(unseen("empty soft-shelled taco", 48.0, 0.025, 0.60, 0.10, 1.8, 0.80, 0.35));
  cat.push_back(unseen("pepper", 60.0, 0.150, 0.55, 0.20, 3.2, 1.1, 0.30));
  cat.push_back(unseen("potato chip", 40.0, 0.002, 0.45, 2.00, 1.3, 1.3, 0.0));
  for (const auto& s : cat) validate_spec(s);
  return cat;
}

namespace {

constexpr const char* kNamePool[] = {
    "sponge",        "orange bottle", "screwdriver",   "dish towel",    "banana",
    "marker",        "stress ball",   "wine cork",     "toy duck",      "avocado",
    "strawberry",    "matchbox",      "soda can",      "tennis ball",   "clothespin",
    "origami crane", "garlic bulb",   "mushroom",      "plum",          "chalk stick",
    "cotton pad",    "walnut",        "grape cluster", "marshmallow",   "soap bar",
    "lemon",         "pill organizer","plastic fork",  "tofu block",    "bread roll",
    "donut",         "kiwi",          "paper airplane","rubber washer", "foam dart",
    "tea bag",
};

// Delicate and robust strata. Crush and yield are re-floored against the
// force the adaptive grasp will actually apply, so every generated object is
// graspable by construction (skip handling is still exercised via tests).
ObjectSpec draw_spec(const char* name, bool delicate, Rng& rng) {
  ObjectSpec s;
  s.name = name;
  s.seen = true;
  s.rest_width_mm = rng.uniform(5.0, 65.0);
  if (delicate) {
    s.mass_kg = rng.log_uniform(0.001, 0.06);
    s.friction_mu = rng.uniform(0.4, 1.1);
    s.stiffness_n_per_mm = rng.uniform(0.05, 0.5);
    s.crush_force_n = rng.uniform(1.3, 2.9);
  } else {
    s.mass_kg = rng.log_uniform(0.02, 0.5);
    s.friction_mu = rng.uniform(0.4, 1.1);
    s.stiffness_n_per_mm = rng.uniform(0.5, 3.0);
    s.crush_force_n = rng.uniform(8.0, 25.0);
  }
  double target = std::clamp(1.2 * s.mass_kg * 9.81 / (2.0 * s.friction_mu), 0.15, 8.0);
  s.crush_force_n = std::max(s.crush_force_n, 2.0 * target);
  bool brittle = rng.uniform() < (delicate ? 0.25 : 0.15);
  if (brittle) {
    s.yield_force_n = s.crush_force_n;
    s.plasticity = 0.0;
  } else {
    double frac = delicate ? rng.uniform(0.35, 0.75) : rng.uniform(0.5, 0.85);
    s.yield_force_n = std::min(s.crush_force_n, std::max(frac * s.crush_force_n, 1.35 * target));
    s.plasticity = delicate ? rng.uniform(0.15, 0.6) : rng.uniform(0.0, 0.3);
  }
  return s;
}

}  // namespace

std::vector<ObjectSpec> sample_object_catalog(size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("catalog.empty", "catalog size must be >= 1");
  std::vector<ObjectSpec> cat = seen_eval_objects();
  if (cat.size() > n) cat.resize(n);
  const size_t fixed = cat.size();

  constexpr size_t pool = sizeof(kNamePool) / sizeof(kNamePool[0]);
  size_t pick = 0;
  while (cat.size() < n) {
    size_t i = cat.size() - fixed;
    std::string name = pick < pool ? kNamePool[pick]
                                   : std::string(kNamePool[pick % pool]) + " " +
                                         std::to_string(pick / pool + 2);
    ++pick;
    cat.push_back(draw_spec(name.c_str(), i % 2 == 0, rng));
  }
  for (const auto& s : cat) validate_spec(s);
  return cat;
}

nlohmann::json object_spec_to_json(const ObjectSpec& s) {
  return {{"name", s.name},
          {"rest_width_mm", s.rest_width_mm},
          {"mass_kg", s.mass_kg},
          {"friction_mu", s.friction_mu},
          {"stiffness_n_per_mm", s.stiffness_n_per_mm},
          {"crush_force_n", s.crush_force_n},
          {"yield_force_n", s.yield_force_n},
          {"plasticity", s.plasticity},
          {"seen", s.seen}};
}

ObjectSpec object_spec_from_json(const nlohmann::json& j) {
  ObjectSpec s;
  s.name = j.at("name").get<std::string>();
  s.rest_width_mm = j.at("rest_width_mm").get<double>();
  s.mass_kg = j.at("mass_kg").get<double>();
  s.friction_mu = j.at("friction_mu").get<double>();
  s.stiffness_n_per_mm = j.at("stiffness_n_per_mm").get<double>();
  s.crush_force_n = j.at("crush_force_n").get<double>();
  s.yield_force_n = j.at("yield_force_n").get<double>();
  s.plasticity = j.at("plasticity").get<double>();
  s.seen = j.at("seen").get<bool>();
  validate_spec(s);
  return s;
}

}  // namespace fg
