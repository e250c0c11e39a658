#include "mec/baselines.hpp"

#include <stdexcept>

#include "mec/rng.hpp"

namespace mec {

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "cto-tp") return PolicyKind::CtoTp;
  if (name == "cto") return PolicyKind::Cto;
  if (name == "fa") return PolicyKind::Fa;
  if (name == "ra") return PolicyKind::Ra;
  throw std::invalid_argument("unknown policy: " + name +
                              " (expected cto-tp, cto, fa, or ra)");
}

std::string policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::CtoTp: return "cto-tp";
    case PolicyKind::Cto: return "cto";
    case PolicyKind::Fa: return "fa";
    case PolicyKind::Ra: return "ra";
  }
  throw std::invalid_argument("unknown policy kind");
}

namespace {

// Full allocation: everything runs locally at the largest permitted rate,
// ignoring system state and the optimization objective.
class FaPolicy final : public Policy {
 public:
  explicit FaPolicy(const Topology& topo) : num_servers_(topo.num_servers()) {}
  PolicyKind kind() const override { return PolicyKind::Fa; }
  HybridAction observe(int, const std::vector<float>&) override {
    HybridAction a = zero_action(num_servers_);
    a.continuous.compute_ratio = 1.0;
    return a;
  }

 private:
  int num_servers_;
};

// Random allocation: uniform target subset and uniform ratios; feasibility
// comes entirely from the shared decode/clamp path.
class RaPolicy final : public Policy {
 public:
  RaPolicy(const Topology& topo, std::uint64_t seed)
      : num_servers_(topo.num_servers()),
        action_count_(discrete_action_count(topo.num_servers())),
        rng_(seeded_rng(seed, 0x2a11)) {}
  PolicyKind kind() const override { return PolicyKind::Ra; }
  HybridAction observe(int, const std::vector<float>&) override {
    HybridAction a = zero_action(num_servers_);
    a.discrete.index = std::min(
        action_count_ - 1, static_cast<int>(uniform01(rng_) * action_count_));
    for (double& v : a.continuous.offload_frac) v = uniform01(rng_);
    a.continuous.compute_ratio = uniform01(rng_);
    for (double& v : a.continuous.bandwidth_ratio) v = uniform01(rng_);
    return a;
  }

 private:
  int num_servers_;
  int action_count_;
  std::mt19937_64 rng_;
};

class LearnerPolicy final : public Policy {
 public:
  LearnerPolicy(PolicyKind kind, const Topology& topo,
                const LearnerConfig& cfg)
      : kind_(kind), learner_(topo, cfg), rounds_(cfg.train_rounds) {}
  PolicyKind kind() const override { return kind_; }

  HybridAction observe(int server,
                       const std::vector<float>& actor_state) override {
    HybridAction a;
    a.discrete = learner_.select_discrete(actor_state);
    a.continuous =
        learner_.act_continuous(server, actor_state, a.discrete, true);
    return a;
  }

  void learn(const Transition& t) override {
    std::vector<int> active;
    for (int m = 0; m < learner_.num_servers(); ++m)
      if (t.active[m]) {
        learner_.store(t, m);
        active.push_back(m);
      }
    if (training_ && !active.empty())
      for (int round = 0; round < rounds_; ++round) learner_.train(active);
  }

  void set_training(bool on) override { training_ = on; }
  HybridLearner* learner() override { return &learner_; }

 private:
  PolicyKind kind_;
  HybridLearner learner_;
  int rounds_ = 1;
  bool training_ = false;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, const Topology& topo,
                                    const LearnerConfig& cfg) {
  switch (kind) {
    case PolicyKind::CtoTp:
    case PolicyKind::Cto:
      return std::make_unique<LearnerPolicy>(kind, topo, cfg);
    case PolicyKind::Fa:
      return std::make_unique<FaPolicy>(topo);
    case PolicyKind::Ra:
      return std::make_unique<RaPolicy>(topo, cfg.seed);
  }
  throw std::invalid_argument("unknown policy kind");
}

}  // namespace mec
