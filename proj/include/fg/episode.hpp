#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fg {

constexpr size_t kEmbeddingDim = 512;
constexpr size_t kStateDim = 16;
constexpr size_t kActionDim = 9;

// Layout conventions for the flat vectors. The 9-dim action is six Cartesian
// pose deltas (constant zeros on a fixed-base gripper rig), gripper position,
// gripper force, one reserved slot. The 16-dim proprioceptive state is
// cartesian_position(6) + joint_position(6) + gripper_position + applied
// force + contact force + reserved. Documented as a convention in README.md.
constexpr size_t kActionGripperPos = 6;
constexpr size_t kActionGripperForce = 7;
constexpr size_t kStateGripperPos = 12;
constexpr size_t kStateAppliedForce = 13;
constexpr size_t kStateContactForce = 14;

struct StepRecord {
  std::array<double, kActionDim> action{};

  struct ActionDict {
    std::array<double, 6> cartesian_position{};
    double gripper_force = 0;
    double gripper_position = 0;
    std::array<double, 3> rotation{};
    std::array<double, 3> translation{};
  } action_dict;

  struct Observation {
    std::array<double, kStateDim> state{};
    double applied_force = 0;
    std::array<double, 6> cartesian_position{};
    double contact_force = 0;
    double gripper_position = 0;
    std::array<double, 6> joint_position{};
    std::string image_ref;
    std::string wrist_image_ref;
  } observation;

  std::string language_instruction;
  std::vector<double> language_embedding;  // kEmbeddingDim entries
  std::string subtask;                     // approach | grasp | home
  bool is_first = false;
  bool is_last = false;
  bool is_terminal = false;
  double discount = 1.0;
  double reward = 0.0;
};

struct Episode {
  std::string file_path;  // stable identifier assigned at generation time
  std::string object_name;
  bool seen = false;
  std::vector<StepRecord> steps;
};

}  // namespace fg
