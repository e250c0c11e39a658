#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mec/actions.hpp"
#include "mec/agents.hpp"
#include "mec/types.hpp"

namespace mec {

enum class PolicyKind { CtoTp, Cto, Fa, Ra };

// Accepts the CLI spellings: cto-tp, cto, fa, ra.
PolicyKind parse_policy_kind(const std::string& name);
std::string policy_kind_name(PolicyKind kind);

// Shared decision interface. Every policy's actions pass through the same
// decode/clamp path in the environment, so feasibility never depends on the
// policy being well behaved.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  // One action for one server holding a pending task.
  virtual HybridAction observe(int server,
                               const std::vector<float>& actor_state) = 0;
  // A completed joint transition; non-learning policies ignore it.
  virtual void learn(const Transition&) {}
  // Gradient updates stay off until the observation phase ends.
  virtual void set_training(bool) {}
  // Diagnostics hook; null for policies without networks.
  virtual HybridLearner* learner() { return nullptr; }
};

// kind = CtoTp/Cto: the hybrid learner (the forecast distinction lives in the
// critic-state construction, which the caller controls). kind = Fa: maximal
// local allocation, no offloading. kind = Ra: uniform random subset and
// ratios. The seed inside cfg drives every random stream.
std::unique_ptr<Policy> make_policy(PolicyKind kind, const Topology& topo,
                                    const LearnerConfig& cfg);

}  // namespace mec
